//! Replicate accumulators. Within a chunk of replicates sums are plain
//! `f64` in replicate order; chunks merge through [`ExactSum`], so totals do
//! not depend on the order in which chunks are combined.

/// Exactly rounded running sum (nonoverlapping partials).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExactSum {
    partials: Vec<f64>,
    special: f64,
}

impl ExactSum {
    pub fn new() -> Self {
        ExactSum::default()
    }

    pub fn add(&mut self, mut x: f64) {
        if !x.is_finite() {
            self.special += x;
            return;
        }
        let mut i = 0;
        for j in 0..self.partials.len() {
            let mut y = self.partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                self.partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        self.partials.truncate(i);
        self.partials.push(x);
    }

    pub fn merge(&mut self, other: &ExactSum) {
        for &p in &other.partials {
            self.add(p);
        }
        self.special += other.special;
    }

    /// The exact sum rounded to nearest.
    pub fn value(&self) -> f64 {
        if self.special != 0.0 || self.special.is_nan() {
            return self.special;
        }
        let p = &self.partials;
        let Some(&last) = p.last() else { return 0.0 };
        let mut n = p.len() - 1;
        let mut hi = last;
        let mut lo = 0.0;
        while n > 0 {
            let x = hi;
            n -= 1;
            let y = p[n];
            hi = x + y;
            lo = y - (hi - x);
            if lo != 0.0 {
                break;
            }
        }
        if n > 0 && ((lo < 0.0 && p[n - 1] < 0.0) || (lo > 0.0 && p[n - 1] > 0.0)) {
            let y = lo * 2.0;
            let x = hi + y;
            if y == x - hi {
                hi = x;
            }
        }
        hi
    }
}

/// Plain sums for one chunk of replicates.
#[derive(Debug, Clone)]
pub struct Tally {
    pub(crate) n: u64,
    pub(crate) sums: Vec<f64>,
}

impl Tally {
    /// Marks the end of one replicate.
    pub fn count(&mut self) {
        self.n += 1;
    }
}

/// Merged sums over any number of chunks.
#[derive(Debug, Clone, PartialEq)]
pub struct Totals {
    n: u64,
    sums: Vec<ExactSum>,
}

impl Totals {
    pub fn absorb(&mut self, t: &Tally) {
        self.n += t.n;
        for (s, &x) in self.sums.iter_mut().zip(&t.sums) {
            s.add(x);
        }
    }

    pub fn merge(&mut self, other: &Totals) {
        self.n += other.n;
        for (s, o) in self.sums.iter_mut().zip(&other.sums) {
            s.merge(o);
        }
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    fn mean_of(&self, i: usize) -> f64 {
        self.sums[i].value() / self.n as f64
    }
}

/// Allocates accumulator slots for the statistics of a run.
#[derive(Debug, Clone, Default)]
pub struct Layout {
    len: usize,
}

impl Layout {
    pub fn new() -> Self {
        Layout::default()
    }

    /// Power sums 1..4 of `x - shift`. A shift near the mean keeps the raw
    /// moment formulas accurate.
    pub fn scalar(&mut self, shift: f64) -> Scalar {
        let s = Scalar { at: self.len, shift };
        self.len += 4;
        s
    }

    /// Mixed power sums of total degree 1..4 of two shifted variables.
    pub fn pair(&mut self, shift_x: f64, shift_y: f64) -> Pair {
        let p = Pair { at: self.len, shift: [shift_x, shift_y] };
        self.len += PAIR_POWERS.len();
        p
    }

    /// First and second mixed sums of a vector.
    pub fn vector(&mut self, shifts: Vec<f64>) -> Vector {
        let k = shifts.len();
        let v = Vector { at: self.len, shifts };
        self.len += k + k * (k + 1) / 2;
        v
    }

    pub fn tally(&self) -> Tally {
        Tally { n: 0, sums: vec![0.0; self.len] }
    }

    pub fn totals(&self) -> Totals {
        Totals { n: 0, sums: vec![ExactSum::new(); self.len] }
    }
}

/// Sample moments of one scalar statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarStats {
    pub mean: f64,
    pub se_mean: f64,
    /// Unbiased sample variance.
    pub var: f64,
    /// Asymptotic standard error of `var`.
    pub se_var: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct Scalar {
    at: usize,
    shift: f64,
}

impl Scalar {
    pub fn push(&self, t: &mut Tally, x: f64) {
        let y = x - self.shift;
        let y2 = y * y;
        let s = &mut t.sums[self.at..self.at + 4];
        s[0] += y;
        s[1] += y2;
        s[2] += y2 * y;
        s[3] += y2 * y2;
    }

    pub fn stats(&self, tot: &Totals) -> ScalarStats {
        let n = tot.n as f64;
        let r: Vec<f64> = (0..4).map(|i| tot.mean_of(self.at + i)).collect();
        let m = r[0];
        let mu2 = (r[1] - m * m).max(0.0);
        let mu4 = r[3] - 4.0 * m * r[2] + 6.0 * m * m * r[1] - 3.0 * m.powi(4);
        let var = mu2 * n / (n - 1.0);
        ScalarStats {
            mean: self.shift + m,
            se_mean: (var / n).sqrt(),
            var,
            se_var: ((mu4 - mu2 * mu2).max(0.0) / n).sqrt(),
        }
    }
}

const PAIR_POWERS: [(usize, usize); 14] = [
    (1, 0), (0, 1),
    (2, 0), (1, 1), (0, 2),
    (3, 0), (2, 1), (1, 2), (0, 3),
    (4, 0), (3, 1), (2, 2), (1, 3), (0, 4),
];

/// Covariance and correlation of two statistics, with delta-method
/// standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairStats {
    pub cov: f64,
    pub se_cov: f64,
    pub corr: f64,
    pub se_corr: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct Pair {
    at: usize,
    shift: [f64; 2],
}

impl Pair {
    pub fn push(&self, t: &mut Tally, x: f64, y: f64) {
        let u = x - self.shift[0];
        let v = y - self.shift[1];
        let pu = [1.0, u, u * u, u * u * u, u * u * u * u];
        let pv = [1.0, v, v * v, v * v * v, v * v * v * v];
        let s = &mut t.sums[self.at..self.at + PAIR_POWERS.len()];
        for (slot, &(i, j)) in s.iter_mut().zip(&PAIR_POWERS) {
            *slot += pu[i] * pv[j];
        }
    }

    pub fn stats(&self, tot: &Totals) -> PairStats {
        let n = tot.n as f64;
        let mut raw = [[0.0; 5]; 5];
        raw[0][0] = 1.0;
        for (k, &(i, j)) in PAIR_POWERS.iter().enumerate() {
            raw[i][j] = tot.mean_of(self.at + k);
        }
        let (mx, my) = (raw[1][0], raw[0][1]);
        let binom = |n: usize, k: usize| -> f64 { [[1., 0., 0., 0., 0.], [1., 1., 0., 0., 0.], [1., 2., 1., 0., 0.], [1., 3., 3., 1., 0.], [1., 4., 6., 4., 1.]][n][k] };
        let central = |i: usize, j: usize| -> f64 {
            let mut s = 0.0;
            for a in 0..=i {
                for b in 0..=j {
                    s += binom(i, a) * binom(j, b) * raw[a][b] * (-mx).powi((i - a) as i32) * (-my).powi((j - b) as i32);
                }
            }
            s
        };
        let (m20, m02, m11) = (central(2, 0).max(0.0), central(0, 2).max(0.0), central(1, 1));
        let m22 = central(2, 2);
        let cov = m11 * n / (n - 1.0);
        let se_cov = ((m22 - m11 * m11).max(0.0) / n).sqrt();
        let sd = (m20 * m02).sqrt();
        if sd == 0.0 {
            return PairStats { cov, se_cov, corr: 0.0, se_corr: 0.0 };
        }
        let rho = m11 / sd;
        let std = |i: usize, j: usize| central(i, j) / (m20.powf(i as f64 / 2.0) * m02.powf(j as f64 / 2.0));
        let (s22, s31, s13, s40, s04) = (std(2, 2), std(3, 1), std(1, 3), std(4, 0), std(0, 4));
        let v = s22 - rho * (s31 + s13) + rho * rho / 4.0 * (s40 + 2.0 * s22 + s04);
        PairStats { cov, se_cov, corr: rho, se_corr: (v.max(0.0) / n).sqrt() }
    }
}

/// Sample mean vector and covariance matrix of a vector statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorStats {
    pub n: u64,
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

impl VectorStats {
    /// `c · mean` and its standard error.
    pub fn linear(&self, c: &[f64]) -> (f64, f64) {
        let est = c.iter().zip(&self.mean).map(|(a, b)| a * b).sum();
        let mut v = 0.0;
        for i in 0..c.len() {
            for j in 0..c.len() {
                v += c[i] * c[j] * self.cov[i][j];
            }
        }
        (est, (v.max(0.0) / self.n as f64).sqrt())
    }
}

#[derive(Debug, Clone)]
pub struct Vector {
    at: usize,
    shifts: Vec<f64>,
}

impl Vector {
    pub fn push(&self, t: &mut Tally, xs: &[f64]) {
        let k = self.shifts.len();
        debug_assert_eq!(xs.len(), k);
        let mut idx = self.at + k;
        for i in 0..k {
            let u = xs[i] - self.shifts[i];
            t.sums[self.at + i] += u;
            for j in i..k {
                t.sums[idx] += u * (xs[j] - self.shifts[j]);
                idx += 1;
            }
        }
    }

    pub fn stats(&self, tot: &Totals) -> VectorStats {
        let k = self.shifts.len();
        let n = tot.n as f64;
        let m: Vec<f64> = (0..k).map(|i| tot.mean_of(self.at + i)).collect();
        let mut cov = vec![vec![0.0; k]; k];
        let mut idx = self.at + k;
        for i in 0..k {
            for j in i..k {
                let c = (tot.mean_of(idx) - m[i] * m[j]) * n / (n - 1.0);
                cov[i][j] = c;
                cov[j][i] = c;
                idx += 1;
            }
        }
        VectorStats { n: tot.n, mean: m.iter().zip(&self.shifts).map(|(a, s)| a + s).collect(), cov }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_sum_is_exact() {
        let mut s = ExactSum::new();
        for x in [1e100, 1.0, -1e100, 1e-100] {
            s.add(x);
        }
        assert_eq!(s.value(), 1.0);
        let mut s = ExactSum::new();
        for _ in 0..10 {
            s.add(0.1);
        }
        assert_eq!(s.value(), 1.0);
    }

    proptest! {
        #[test]
        fn merge_order_does_not_matter(xs in proptest::collection::vec(-1e6f64..1e6, 1..60), cut in 0usize..60) {
            let cut = cut.min(xs.len());
            let sum_of = |v: &[f64]| { let mut s = ExactSum::new(); v.iter().for_each(|&x| s.add(x)); s };
            let (a, b) = (sum_of(&xs[..cut]), sum_of(&xs[cut..]));
            let mut ab = a.clone();
            ab.merge(&b);
            let mut ba = b.clone();
            ba.merge(&a);
            let mut rev = xs.clone();
            rev.reverse();
            prop_assert_eq!(ab.value(), ba.value());
            prop_assert_eq!(ab.value(), sum_of(&rev).value());
        }
    }

    #[test]
    fn scalar_and_pair_moments() {
        let mut lay = Layout::new();
        let s = lay.scalar(0.0);
        let p = lay.pair(0.1, -0.2);
        let v = lay.vector(vec![0.0, 0.0]);
        let mut t = lay.tally();
        let data = [(1.0, 2.0), (2.0, 1.0), (3.0, 5.0), (4.0, 3.0)];
        for &(x, y) in &data {
            s.push(&mut t, x);
            p.push(&mut t, x, y);
            v.push(&mut t, &[x, y]);
            t.count();
        }
        let mut tot = lay.totals();
        tot.absorb(&t);
        let st = s.stats(&tot);
        assert!((st.mean - 2.5).abs() < 1e-15);
        assert!((st.var - 5.0 / 3.0).abs() < 1e-14);
        let ps = p.stats(&tot);
        // cov = sum (x-2.5)(y-2.75) / 3
        assert!((ps.cov - (1.125 + 0.875 + 1.125 + 0.375) / 3.0).abs() < 1e-14);
        let vs = v.stats(&tot);
        assert!((vs.cov[0][1] - ps.cov).abs() < 1e-14);
        assert!((vs.mean[1] - 2.75).abs() < 1e-15);
        let (est, _) = vs.linear(&[1.0, -1.0]);
        assert!((est + 0.25).abs() < 1e-15);
    }
}
