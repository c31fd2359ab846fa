//! Matrix permanents: row expansion for small matrices, Ryser's formula
//! with Gray-code updates above that.

use nalgebra::DMatrix;

/// Permanent of a square matrix. The empty matrix has permanent 1.
///
/// Up to 6×6 the row expansion is used: it has no cancellations, so it
/// keeps full relative accuracy for nonnegative matrices whose entries
/// span many orders of magnitude.
pub fn permanent(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "permanent needs a square matrix");
    match n {
        0 => return 1.0,
        1 => return a[(0, 0)],
        2 => return a[(0, 0)] * a[(1, 1)] + a[(0, 1)] * a[(1, 0)],
        3..=6 => return expand(a, 0, (1u32 << n) - 1),
        _ => {}
    }
    ryser(a)
}

fn ryser(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    assert!(n < 31, "permanent of a {n}x{n} matrix is out of reach");
    let mut rowsum = vec![0.0; n];
    let mut total = 0.0;
    let mut gray: u32 = 0;
    for k in 1u32..(1u32 << n) {
        let next = k ^ (k >> 1);
        let j = (gray ^ next).trailing_zeros() as usize;
        let sign = if next & (1 << j) != 0 { 1.0 } else { -1.0 };
        for (i, r) in rowsum.iter_mut().enumerate() {
            *r += sign * a[(i, j)];
        }
        gray = next;
        let prod: f64 = rowsum.iter().product();
        if next.count_ones() % 2 == 1 {
            total -= prod;
        } else {
            total += prod;
        }
    }
    if n % 2 == 1 {
        -total
    } else {
        total
    }
}

fn expand(a: &DMatrix<f64>, row: usize, cols: u32) -> f64 {
    if cols == 0 {
        return 1.0;
    }
    let mut total = 0.0;
    let mut rest = cols;
    while rest != 0 {
        let j = rest.trailing_zeros();
        rest &= rest - 1;
        total += a[(row, j as usize)] * expand(a, row + 1, cols & !(1 << j));
    }
    total
}

/// Ryser's formula, exposed for cross-checks.
pub fn permanent_ryser(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    if n == 0 {
        return 1.0;
    }
    ryser(a)
}

/// `a` with the listed rows and columns removed.
pub fn minor(a: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    let keep_r: Vec<usize> = (0..a.nrows()).filter(|i| !rows.contains(i)).collect();
    let keep_c: Vec<usize> = (0..a.ncols()).filter(|j| !cols.contains(j)).collect();
    DMatrix::from_fn(keep_r.len(), keep_c.len(), |i, j| a[(keep_r[i], keep_c[j])])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(a: &DMatrix<f64>) -> f64 {
        fn rec(a: &DMatrix<f64>, row: usize, used: &mut Vec<bool>) -> f64 {
            if row == a.nrows() {
                return 1.0;
            }
            let mut s = 0.0;
            for j in 0..a.ncols() {
                if !used[j] {
                    used[j] = true;
                    s += a[(row, j)] * rec(a, row + 1, used);
                    used[j] = false;
                }
            }
            s
        }
        rec(a, 0, &mut vec![false; a.ncols()])
    }

    #[test]
    fn all_ones_gives_factorial() {
        for n in 0..8 {
            let a = DMatrix::from_element(n, n, 1.0);
            let f: f64 = (1..=n).map(|k| k as f64).product();
            assert!((permanent(&a) - f).abs() < 1e-9 * f.max(1.0));
        }
    }

    #[test]
    fn agrees_with_expansion() {
        let a = DMatrix::from_fn(6, 6, |i, j| ((i * 7 + j * 3) as f64 * 0.37).sin());
        assert!((permanent(&a) - brute(&a)).abs() < 1e-12);
    }

    #[test]
    fn ryser_matches_row_expansion() {
        let a = DMatrix::from_fn(5, 5, |i, j| 1.0 + ((3 * i + 7 * j) % 5) as f64 * 0.37);
        let (x, y) = (permanent(&a), permanent_ryser(&a));
        assert!((x - y).abs() < 1e-12 * x);
        let b = DMatrix::from_fn(7, 7, |i, j| (0.3 * (i + 2 * j) as f64).cos());
        assert!((permanent(&b) - brute(&b)).abs() < 1e-12);
    }

    #[test]
    fn minor_drops_rows_and_columns() {
        let a = DMatrix::from_fn(3, 3, |i, j| (3 * i + j) as f64);
        let m = minor(&a, &[1], &[0, 2]);
        assert_eq!(m.shape(), (2, 1));
        assert_eq!(m[(1, 0)], 7.0);
    }
}
