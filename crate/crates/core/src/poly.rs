//! Dense real polynomials in ascending-degree order.

/// `c[0] + c[1] x + ... + c[n] x^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Trailing zero coefficients are dropped; the zero polynomial keeps one entry.
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        let d = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| k as f64 * c)
            .collect();
        Self::new(d)
    }

    /// Antiderivative with zero constant term.
    pub fn antiderivative(&self) -> Self {
        let mut a = Vec::with_capacity(self.coeffs.len() + 1);
        a.push(0.0);
        a.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| c / (k as f64 + 1.0)),
        );
        Self::new(a)
    }

    /// Coefficients of `h -> self(x0 + h)`, i.e. the Taylor coefficients at `x0`.
    pub fn taylor_at(&self, x0: f64) -> Self {
        let mut c = self.coeffs.clone();
        let n = c.len();
        for i in 0..n {
            for j in (i..n - 1).rev() {
                c[j] += x0 * c[j + 1];
            }
        }
        Self::new(c)
    }

    /// `max |c_k|`.
    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Lowest index with a non-zero coefficient, i.e. the order of the zero at 0.
    pub fn order_at_zero(&self) -> Option<usize> {
        self.coeffs.iter().position(|&c| c != 0.0)
    }

    /// Real roots in the closed interval `[a, b]`, ascending.
    ///
    /// Roots are isolated between consecutive critical points (found
    /// recursively) and refined by bisection. Roots of even multiplicity are
    /// only reported when the polynomial evaluates to exactly zero there.
    pub fn real_roots_in(&self, a: f64, b: f64) -> Vec<f64> {
        if a > b || self.degree() == 0 {
            return Vec::new();
        }
        let mut knots = vec![a];
        if self.degree() >= 2 {
            knots.extend(
                self.derivative()
                    .real_roots_in(a, b)
                    .into_iter()
                    .filter(|&c| c > a && c < b),
            );
        }
        knots.push(b);

        let mut roots: Vec<f64> = Vec::new();
        let push = |r: f64, roots: &mut Vec<f64>| {
            if roots.last().is_none_or(|&last| r > last) {
                roots.push(r);
            }
        };
        for w in knots.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let (flo, fhi) = (self.eval(lo), self.eval(hi));
            if flo == 0.0 {
                push(lo, &mut roots);
            }
            if flo * fhi < 0.0 {
                push(bisect(|x| self.eval(x), lo, hi, flo), &mut roots);
            }
        }
        if self.eval(b) == 0.0 {
            push(b, &mut roots);
        }
        roots
    }
}

/// Bisection on a sign change, run until the midpoint coincides with an end.
pub(crate) fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut flo: f64) -> f64 {
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return if flo.abs() <= f(hi).abs() { lo } else { hi };
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
}
