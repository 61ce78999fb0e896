use super::{rank_scored, Candidate};
use crate::embedding::{dot, EmbeddingMatrix};
use crate::error::{Error, Result};

/// Brute-force top-`k` by cosine similarity with the same
/// `(score desc, id asc)` ordering as the forest query. `k` larger than the
/// matrix is clamped.
pub fn exact_topk(m: &EmbeddingMatrix, q: &[f32], k: usize) -> Result<Vec<Candidate>> {
    if q.len() != m.dim() {
        return Err(Error::input(format!(
            "query has dim {}, matrix has dim {}",
            q.len(),
            m.dim()
        )));
    }
    if k < 1 {
        return Err(Error::input("k must be at least 1"));
    }
    let scored = m.rows().map(|r| dot(r, q)).enumerate().collect();
    Ok(rank_scored(scored, m.ids(), k))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis3() -> EmbeddingMatrix {
        EmbeddingMatrix::from_rows(
            vec!["e0".into(), "e1".into(), "e2".into()],
            vec![
                vec![1.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0],
            ],
        )
        .unwrap()
    }

    #[test]
    fn orthonormal_basis() {
        let m = basis3();
        let hits = exact_topk(&m, &[0.0, 1.0, 0.0], 3).unwrap();
        let ids: Vec<_> = hits.iter().map(|c| c.subject_code.as_str()).collect();
        // Ties at 0.0 fall back to ascending id.
        assert_eq!(ids, ["e1", "e0", "e2"]);
        assert_eq!(hits[0].score, 1.0);
        assert_eq!(hits[1].score, 0.0);
        assert_eq!(hits[2].score, 0.0);
        assert_eq!(hits.iter().map(|c| c.rank).collect::<Vec<_>>(), [1, 2, 3]);
    }

    #[test]
    fn k_clamped() {
        assert_eq!(
            exact_topk(&basis3(), &[1.0, 0.0, 0.0], 10).unwrap().len(),
            3
        );
    }

    #[test]
    fn dim_mismatch() {
        assert!(exact_topk(&basis3(), &[1.0, 0.0], 1).is_err());
    }
}
