mod common;

use std::collections::HashSet;

use proptest::prelude::*;
use subjtag::ann::{decode_forest, encode_forest, exact_topk, IndexConfig, RPForest};
use subjtag::corpus::{
    documents_to_jsonl, parse_documents, parse_subjects, render_document_text, subjects_to_jsonl,
    Document, Subject,
};
use subjtag::embedding::{hash_embed, load_matrix, norm, normalize, save_matrix, EmbeddingMatrix};
use subjtag::eval::recall_at_k;
use subjtag::pipeline::lexical_score;

fn unit_rows(n: usize, dim: usize) -> impl Strategy<Value = Vec<Vec<f32>>> {
    prop::collection::vec(prop::collection::vec(-1.0f32..1.0, dim), n).prop_map(|rows| {
        rows.into_iter()
            .map(|mut r| {
                if !normalize(&mut r) {
                    r = vec![0.0; r.len()];
                    r[0] = 1.0;
                }
                r
            })
            .collect()
    })
}

fn matrix(rows: Vec<Vec<f32>>) -> EmbeddingMatrix {
    let ids = (0..rows.len()).map(|i| format!("s{i:04}")).collect();
    EmbeddingMatrix::from_rows(ids, rows).unwrap()
}

fn document() -> impl Strategy<Value = Document> {
    (
        "[a-z0-9]{1,8}",
        "[A-Za-zäöü ]{0,3}[A-Za-z][A-Za-z ]{0,10}",
        "[ -~]{0,30}",
        "(de|en)",
        prop::collection::vec("[a-z0-9]{1,6}", 0..4),
    )
        .prop_map(|(id, title, abstract_text, language, gold)| Document {
            id,
            title,
            abstract_text,
            language,
            gold_subjects: gold,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn documents_round_trip(docs in prop::collection::vec(document(), 0..8)) {
        let mut seen = HashSet::new();
        let docs: Vec<_> = docs.into_iter().filter(|d| seen.insert(d.id.clone())).collect();
        prop_assert_eq!(parse_documents(&documents_to_jsonl(&docs)).unwrap(), docs);
    }

    #[test]
    fn subjects_round_trip(
        entries in prop::collection::vec(("[a-z0-9]{1,8}", "[A-Za-z][a-z ]{0,12}", prop::option::of("[ -~]{0,20}")), 0..8)
    ) {
        let mut seen = HashSet::new();
        let subjects: Vec<_> = entries
            .into_iter()
            .filter(|(c, _, _)| seen.insert(c.clone()))
            .map(|(code, name, definition)| Subject { code, name, definition })
            .collect();
        prop_assert_eq!(parse_subjects(&subjects_to_jsonl(&subjects)).unwrap(), subjects);
    }

    #[test]
    fn rendered_document_starts_with_title(d in document()) {
        let text = render_document_text(&d);
        prop_assert!(!text.is_empty());
        prop_assert!(text.starts_with(d.title.trim()));
    }

    #[test]
    fn lexical_is_symmetric_and_bounded(a in "[a-zA-Z ]{1,30}", b in "[a-zA-Z ]{1,30}") {
        prop_assume!(!a.trim().is_empty() && !b.trim().is_empty());
        let ab = lexical_score(&a, &b);
        prop_assert_eq!(ab, lexical_score(&b, &a));
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert_eq!(lexical_score(&a, &a), 1.0);
    }

    #[test]
    fn hash_embedding_is_pure_and_unit(text in "[ -~]{1,40}", seed in any::<u64>(), dim in 8usize..300) {
        prop_assume!(!text.trim().is_empty());
        let a = hash_embed(&text, dim, seed).unwrap();
        prop_assert_eq!(&a, &hash_embed(&text, dim, seed).unwrap());
        prop_assert_eq!(a.len(), dim);
        prop_assert!((norm(&a) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn recall_monotone_bounded_and_blind_below_k(
        ranked in prop::collection::vec(0u8..30, 0..40),
        gold in prop::collection::hash_set(0u8..30, 1..6),
        k in 1usize..40,
        seed in any::<u64>(),
    ) {
        let ranked: Vec<String> = ranked.iter().map(u8::to_string).collect();
        let gold_s: Vec<String> = gold.iter().map(u8::to_string).collect();
        let gold: HashSet<&str> = gold_s.iter().map(String::as_str).collect();
        let r = recall_at_k(&ranked, &gold, k).unwrap();
        prop_assert!((0.0..=1.0).contains(&r));
        prop_assert!(recall_at_k(&ranked, &gold, k + 1).unwrap() >= r);
        let mut shuffled = ranked.clone();
        if shuffled.len() > k {
            use rand::{seq::SliceRandom, SeedableRng};
            shuffled[k..].shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        }
        prop_assert_eq!(recall_at_k(&shuffled, &gold, k).unwrap(), r);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn exhaustive_query_equals_exact(
        rows in unit_rows(120, 8),
        q in unit_rows(1, 8),
        k in 1usize..130,
        seed in any::<u64>(),
    ) {
        let m = matrix(rows);
        let f = RPForest::build(&m, &IndexConfig { n_trees: 6, leaf_size: 4, seed }).unwrap();
        let approx = f.searcher(&m).unwrap().query(&q[0], k, f.exhaustive_search_k()).unwrap();
        let exact = exact_topk(&m, &q[0], k).unwrap();
        prop_assert_eq!(approx.len(), k.min(120));
        prop_assert_eq!(approx, exact);
    }

    #[test]
    fn results_are_ordered_with_contiguous_ranks(
        rows in unit_rows(200, 6),
        q in unit_rows(1, 6),
        search_k in 1usize..400,
    ) {
        let m = matrix(rows);
        let f = RPForest::build(&m, &IndexConfig { n_trees: 4, leaf_size: 8, seed: 1 }).unwrap();
        let hits = f.searcher(&m).unwrap().query(&q[0], 15, search_k).unwrap();
        for (i, w) in hits.windows(2).enumerate() {
            prop_assert!(
                w[0].score > w[1].score
                    || (w[0].score == w[1].score && w[0].subject_code < w[1].subject_code),
                "order broken at {}", i
            );
        }
        prop_assert!(hits.iter().enumerate().all(|(i, c)| c.rank == i + 1));
    }

    #[test]
    fn leaves_partition_items(rows in unit_rows(150, 5), leaf_size in 2usize..20, seed in any::<u64>()) {
        let m = matrix(rows);
        let f = RPForest::build(&m, &IndexConfig { n_trees: 3, leaf_size, seed }).unwrap();
        for t in f.trees() {
            let mut all: Vec<u32> = t.leaves().flat_map(|(items, _)| items.to_vec()).collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..150).collect::<Vec<u32>>());
            prop_assert!(t.leaves().all(|(items, degenerate)| degenerate || items.len() <= leaf_size));
        }
    }

    #[test]
    fn forest_bytes_round_trip(rows in unit_rows(60, 4), seed in any::<u64>()) {
        let m = matrix(rows);
        let f = RPForest::build(&m, &IndexConfig { n_trees: 3, leaf_size: 4, seed }).unwrap();
        let bytes = encode_forest(&f).unwrap();
        let back = decode_forest(&bytes).unwrap();
        prop_assert_eq!(encode_forest(&back).unwrap(), bytes);
        prop_assert_eq!(back, f);
    }

    #[test]
    fn matrix_file_round_trip(rows in unit_rows(7, 5)) {
        let m = matrix(rows);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.emb");
        save_matrix(&m, &path).unwrap();
        prop_assert_eq!(load_matrix(&path).unwrap(), m);
    }
}
