//! Small instances shipped with the crate.

use crate::format::{parse_instance, ParsedInstance};

pub const PAPER_A_JSON: &str = include_str!("../data/paper_a.json");
pub const PAPER_B_JSON: &str = include_str!("../data/paper_b.json");

/// Gradient originally stated for example B at its known point.
/// It does not match the tensor and is kept only to report the discrepancy.
pub const PAPER_B_STATED_GRADIENT: [f64; 8] = [2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];

/// Gradient of example B at its known point, computed from the data.
pub const PAPER_B_GRADIENT: [f64; 8] = [2.0, -2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];

/// 2×3×3 instance with `b = (5, 0)`, `s = t = 2` and known point `(1,1,0,1,1,0)`.
pub fn paper_a() -> ParsedInstance {
    parse_instance(PAPER_A_JSON).expect("bundled file is valid")
}

/// 2×4×4 instance with `b = (1, 7)`, `s = t = 3` and known point `(1,1,0,0,2,1,0,0)`.
pub fn paper_b() -> ParsedInstance {
    parse_instance(PAPER_B_JSON).expect("bundled file is valid")
}

pub fn by_name(name: &str) -> Option<ParsedInstance> {
    match name {
        "paperA" => Some(paper_a()),
        "paperB" => Some(paper_b()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_files_parse() {
        let a = paper_a();
        assert_eq!(a.instance.tensor.stored_len(), 10);
        assert_eq!(a.instance.b, vec![5.0, 0.0]);
        assert_eq!((a.instance.s, a.instance.t), (2, 2));
        assert_eq!(a.known_point.unwrap().as_slice(), &[1.0, 1.0, 0.0, 1.0, 1.0, 0.0]);

        let b = paper_b();
        assert_eq!(b.instance.tensor.stored_len(), 11);
        assert_eq!(b.instance.dims(), (2, 4, 4));
        let z = b.known_point.unwrap();
        assert_eq!(b.instance.residual(&z).unwrap(), vec![2.0, -1.0]);
        assert_eq!(b.instance.gradient(&z).unwrap(), PAPER_B_GRADIENT.to_vec());
    }
}
