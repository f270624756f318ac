//! Dense two-phase simplex for small linear programs.
//!
//! Problems have the form `min c·x` subject to `A_eq x = b_eq`,
//! `A_le x <= b_le` and `x >= 0`. Pivoting follows Bland's rule, so the
//! method terminates on degenerate problems; it is meant for the few-hundred
//! variable instances that occur in degradedness and redundancy checks.

const PIVOT_EPS: f64 = 1e-11;

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn value(&self) -> Option<f64> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(*value),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    n: usize,
    objective: Vec<f64>,
    eq: Vec<(Vec<f64>, f64)>,
    le: Vec<(Vec<f64>, f64)>,
}

impl LinearProgram {
    /// A program over `n` non-negative variables with zero objective.
    pub fn new(n: usize) -> Self {
        LinearProgram { n, objective: vec![0.0; n], ..Default::default() }
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    /// Sets the objective to minimize.
    pub fn minimize(&mut self, c: Vec<f64>) -> &mut Self {
        assert_eq!(c.len(), self.n);
        self.objective = c;
        self
    }

    /// Sets the objective to maximize (stored negated).
    pub fn maximize(&mut self, c: Vec<f64>) -> &mut Self {
        self.minimize(c.into_iter().map(|v| -v).collect())
    }

    pub fn add_eq(&mut self, a: Vec<f64>, b: f64) -> &mut Self {
        assert_eq!(a.len(), self.n);
        self.eq.push((a, b));
        self
    }

    pub fn add_le(&mut self, a: Vec<f64>, b: f64) -> &mut Self {
        assert_eq!(a.len(), self.n);
        self.le.push((a, b));
        self
    }

    pub fn solve(&self) -> LpOutcome {
        let n = self.n;
        let m = self.eq.len() + self.le.len();
        let n_slack = self.le.len();
        let n_art = m;
        let cols = n + n_slack + n_art;

        let mut t = vec![vec![0.0; cols]; m];
        let mut rhs = vec![0.0; m];
        let mut scale = 1.0f64;
        for (i, (a, b)) in self.eq.iter().chain(self.le.iter()).enumerate() {
            t[i][..n].copy_from_slice(a);
            if i >= self.eq.len() {
                t[i][n + i - self.eq.len()] = 1.0;
            }
            rhs[i] = *b;
            if rhs[i] < 0.0 {
                for v in t[i].iter_mut() {
                    *v = -*v;
                }
                rhs[i] = -rhs[i];
            }
            t[i][n + n_slack + i] = 1.0;
            scale = scale.max(rhs[i].abs());
        }
        let mut basis: Vec<usize> = (0..m).map(|i| n + n_slack + i).collect();

        // phase 1: minimize the sum of artificials
        let mut c1 = vec![0.0; cols];
        for c in c1.iter_mut().skip(n + n_slack) {
            *c = 1.0;
        }
        let mut active = vec![true; cols];
        if !run_simplex(&mut t, &mut rhs, &mut basis, &c1, &active) {
            // phase 1 is bounded below by zero
            unreachable!("phase 1 cannot be unbounded");
        }
        let infeas: f64 = basis
            .iter()
            .zip(&rhs)
            .filter(|(&b, _)| b >= n + n_slack)
            .map(|(_, r)| *r)
            .sum();
        if infeas > 1e-9 * scale {
            return LpOutcome::Infeasible;
        }

        // drive artificials out of the basis, dropping redundant rows
        let mut i = 0;
        while i < t.len() {
            if basis[i] >= n + n_slack {
                if let Some(j) = (0..n + n_slack).find(|&j| t[i][j].abs() > 1e-9) {
                    pivot(&mut t, &mut rhs, &mut basis, i, j);
                } else {
                    t.remove(i);
                    rhs.remove(i);
                    basis.remove(i);
                    continue;
                }
            }
            i += 1;
        }
        for a in active.iter_mut().skip(n + n_slack) {
            *a = false;
        }

        let mut c2 = vec![0.0; cols];
        c2[..n].copy_from_slice(&self.objective);
        if !run_simplex(&mut t, &mut rhs, &mut basis, &c2, &active) {
            return LpOutcome::Unbounded;
        }
        let mut x = vec![0.0; n];
        for (r, &b) in basis.iter().enumerate() {
            if b < n {
                x[b] = rhs[r].max(0.0);
            }
        }
        let value = x.iter().zip(&self.objective).map(|(a, b)| a * b).sum();
        LpOutcome::Optimal { x, value }
    }
}

fn pivot(t: &mut [Vec<f64>], rhs: &mut [f64], basis: &mut [usize], r: usize, c: usize) {
    let p = t[r][c];
    for v in t[r].iter_mut() {
        *v /= p;
    }
    rhs[r] /= p;
    let prow = t[r].clone();
    let prhs = rhs[r];
    for i in 0..t.len() {
        if i == r {
            continue;
        }
        let f = t[i][c];
        if f != 0.0 {
            for (v, pv) in t[i].iter_mut().zip(&prow) {
                *v -= f * pv;
            }
            rhs[i] -= f * prhs;
            t[i][c] = 0.0;
        }
    }
    basis[r] = c;
}

/// Returns false when the objective is unbounded below.
fn run_simplex(
    t: &mut [Vec<f64>],
    rhs: &mut [f64],
    basis: &mut [usize],
    cost: &[f64],
    active: &[bool],
) -> bool {
    let cols = cost.len();
    loop {
        // Bland: smallest index with negative reduced cost
        let mut entering = None;
        for j in 0..cols {
            if !active[j] || basis.contains(&j) {
                continue;
            }
            let mut rc = cost[j];
            for (i, &b) in basis.iter().enumerate() {
                rc -= cost[b] * t[i][j];
            }
            if rc < -1e-10 {
                entering = Some(j);
                break;
            }
        }
        let Some(j) = entering else { return true };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..t.len() {
            if t[i][j] > PIVOT_EPS {
                let ratio = rhs[i] / t[i][j];
                match leave {
                    None => leave = Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - 1e-12 || (ratio <= lr + 1e-12 && basis[i] < basis[li]) {
                            leave = Some((i, ratio));
                        }
                    }
                }
            }
        }
        let Some((r, _)) = leave else { return false };
        pivot(t, rhs, basis, r, j);
        for v in rhs.iter_mut() {
            if *v < 0.0 && *v > -1e-12 {
                *v = 0.0;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_max() {
        // max x + y, x <= 2, y <= 3, x + y <= 4
        let mut lp = LinearProgram::new(2);
        lp.maximize(vec![1.0, 1.0])
            .add_le(vec![1.0, 0.0], 2.0)
            .add_le(vec![0.0, 1.0], 3.0)
            .add_le(vec![1.0, 1.0], 4.0);
        let v = lp.solve().value().unwrap();
        assert!((v + 4.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(1);
        lp.add_le(vec![1.0], -1.0);
        assert_eq!(lp.solve(), LpOutcome::Infeasible);
        let mut lp = LinearProgram::new(2);
        lp.maximize(vec![1.0, 0.0]).add_le(vec![0.0, 1.0], 1.0);
        assert_eq!(lp.solve(), LpOutcome::Unbounded);
    }

    #[test]
    fn equalities_with_negative_rhs() {
        // x - y = -1, x + y = 3  => x = 1, y = 2
        let mut lp = LinearProgram::new(2);
        lp.minimize(vec![1.0, 0.0])
            .add_eq(vec![1.0, -1.0], -1.0)
            .add_eq(vec![1.0, 1.0], 3.0);
        match lp.solve() {
            LpOutcome::Optimal { x, .. } => {
                assert!((x[0] - 1.0).abs() < 1e-9 && (x[1] - 2.0).abs() < 1e-9);
            }
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new(2);
        lp.minimize(vec![1.0, 2.0])
            .add_eq(vec![1.0, 1.0], 1.0)
            .add_eq(vec![2.0, 2.0], 2.0);
        let v = lp.solve().value().unwrap();
        assert!((v - 1.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example, cycles under the textbook largest-coefficient rule.
        let mut lp = LinearProgram::new(4);
        lp.minimize(vec![-0.75, 150.0, -0.02, 6.0])
            .add_le(vec![0.25, -60.0, -0.04, 9.0], 0.0)
            .add_le(vec![0.5, -90.0, -0.02, 3.0], 0.0)
            .add_le(vec![0.0, 0.0, 1.0, 0.0], 1.0);
        let v = lp.solve().value().unwrap();
        assert!((v + 0.05).abs() < 1e-9, "{v}");
    }
}
