//! Character trigram extraction shared by the hash embedder and the lexical
//! pair scorer.

/// Marker placed once before and once after the text.
pub const BOUNDARY: char = '\u{2}';

pub type Trigram = [char; 3];

/// Trigrams of the trimmed, lowercased text padded with [`BOUNDARY`] at both
/// ends, in text order (duplicates kept). Empty for all-whitespace input.
pub fn trigrams(text: &str) -> Vec<Trigram> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Vec::new();
    }
    let mut chars = Vec::with_capacity(trimmed.len() + 2);
    chars.push(BOUNDARY);
    chars.extend(trimmed.chars().flat_map(char::to_lowercase));
    chars.push(BOUNDARY);
    chars.windows(3).map(|w| [w[0], w[1], w[2]]).collect()
}
