use num_integer::Roots;

use super::PellEquation;

pub const DEFAULT_SEARCH_BOUND: u64 = 10_000;

/// All `(x, y)` with `1 <= x, y <= bound` solving the equation, ascending
/// in `x`.
pub fn bounded_search(eq: &PellEquation, bound: u64) -> Vec<(u64, u64)> {
    let (k, m, tau) = (eq.k() as i128, eq.m() as i128, eq.tau() as i128);
    let mut out = Vec::new();
    for x in 1..=bound {
        let Some(kx2) = (x as i128).checked_mul(x as i128).and_then(|s| s.checked_mul(k)) else {
            break;
        };
        // M y^2 = K x^2 - tau
        let rhs = kx2 - tau;
        if rhs <= 0 || rhs % m != 0 {
            continue;
        }
        let y2 = (rhs / m) as u128;
        let y = y2.sqrt();
        if y * y == y2 && y >= 1 && y <= bound as u128 {
            out.push((x, y as u64));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_table_witnesses() {
        let w = bounded_search(&PellEquation::new(4, 18, 4).unwrap(), 20);
        assert!(w.contains(&(17, 8)));
        let w = bounded_search(&PellEquation::new(5, 8, 5).unwrap(), 20);
        assert!(w.contains(&(19, 15)));
        assert!(bounded_search(&PellEquation::new(12, 1, 2).unwrap(), 1000).is_empty());
    }

    #[test]
    fn respects_bound_on_both_coordinates() {
        // 5x^2 - 2y^2 = 5 has (19, 30): x fits under 20 but y does not
        let eq = PellEquation::new(5, 2, 5).unwrap();
        assert!(bounded_search(&eq, 20).is_empty());
        assert_eq!(bounded_search(&eq, 30), vec![(19, 30)]);
    }

    #[test]
    fn negative_right_hand_side() {
        // x^2 - 2y^2 = -1: (1,1), (7,5), (41,29)
        let eq = PellEquation::new(1, 2, -1).unwrap();
        assert_eq!(bounded_search(&eq, 50), vec![(1, 1), (7, 5), (41, 29)]);
    }
}
