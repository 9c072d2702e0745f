/// Dense symmetric matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn zeros(n: usize) -> Self {
        SymmetricMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    /// `data` must be symmetric.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * n, "matrix data has the wrong length");
        SymmetricMatrix { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.data[i * self.n..(i + 1) * self.n];
            *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    /// Largest eigenvalue modulus by power iteration.
    ///
    /// Tracks `||A v||` for unit `v`, which converges to the spectral norm even
    /// when `+s` and `-s` are both eigenvalues. Stops once consecutive
    /// estimates agree to `rel_tol`.
    pub fn spectral_norm(&self, rel_tol: f64, max_iters: usize) -> f64 {
        let n = self.n;
        if n == 0 || self.data.iter().all(|&v| v == 0.0) {
            return 0.0;
        }
        // Fixed, slightly irregular start so no eigenvector is missed by symmetry.
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 7919 % 97) as f64 / 97.0)).collect();
        normalize(&mut v);
        let mut w = vec![0.0; n];
        let mut estimate = 0.0;
        for _ in 0..max_iters {
            self.mul_vec(&v, &mut w);
            let norm = norm2(&w);
            if norm == 0.0 {
                // Start vector landed in the null space; restart on a basis vector.
                v.iter_mut().for_each(|x| *x = 0.0);
                v[estimate_restart(&self.data, n)] = 1.0;
                continue;
            }
            w.iter_mut().for_each(|x| *x /= norm);
            std::mem::swap(&mut v, &mut w);
            if (norm - estimate).abs() <= rel_tol * norm {
                return norm;
            }
            estimate = norm;
        }
        estimate
    }
}

fn estimate_restart(data: &[f64], n: usize) -> usize {
    (0..n)
        .max_by(|&a, &b| {
            let ra: f64 = data[a * n..(a + 1) * n].iter().map(|x| x * x).sum();
            let rb: f64 = data[b * n..(b + 1) * n].iter().map(|x| x * x).sum();
            ra.total_cmp(&rb)
        })
        .unwrap_or(0)
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn normalize(x: &mut [f64]) {
    let n = norm2(x);
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
}
