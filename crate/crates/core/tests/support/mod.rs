//! Reference implementations and statistics shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use netshift_core::embed::Embedding;
use netshift_core::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One-sample Kolmogorov-Smirnov statistic against `cdf`.
pub fn ks_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs: Vec<f64> = sample.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic p-value of the KS statistic with Stephens' small-sample
/// correction.
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=200 {
        let term = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

pub fn ks_test(sample: &[f64], cdf: impl Fn(f64) -> f64) -> (f64, f64) {
    let d = ks_statistic(sample, cdf);
    (d, ks_pvalue(d, sample.len()))
}

pub fn chi2_cdf(dof: usize) -> impl Fn(f64) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    let dist = ChiSquared::new(dof as f64).unwrap();
    move |x| dist.cdf(x)
}

pub fn normal_cdf(mean: f64, sd: f64) -> impl Fn(f64) -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    let dist = Normal::new(mean, sd).unwrap();
    move |x| dist.cdf(x)
}

/// Fraction of vertices whose estimated and true status agree.
pub fn accuracy(truth: &[bool], estimate: &[bool]) -> f64 {
    let hits = truth.iter().zip(estimate).filter(|(a, b)| a == b).count();
    hits as f64 / truth.len() as f64
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = s.len();
    if m % 2 == 1 {
        s[m / 2]
    } else {
        0.5 * (s[m / 2 - 1] + s[m / 2])
    }
}

pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

/// Lloyd's k-means with farthest-point initialization from several starts;
/// returns labels of the lowest-inertia run.
pub fn kmeans(points: &Matrix, k: usize, starts: usize, seed: u64) -> Vec<usize> {
    let n = points.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist2 = |i: usize, c: &Matrix, j: usize| -> f64 {
        (0..points.ncols())
            .map(|a| (points[(i, a)] - c[(j, a)]).powi(2))
            .sum()
    };
    let mut best: Option<(f64, Vec<usize>)> = None;
    for _ in 0..starts {
        let mut centers = Matrix::zeros(k, points.ncols());
        centers
            .row_mut(0)
            .copy_from(&points.row(rng.random_range(0..n)));
        for c in 1..k {
            let far = (0..n)
                .max_by(|&a, &b| {
                    let da = (0..c)
                        .map(|j| dist2(a, &centers, j))
                        .fold(f64::INFINITY, f64::min);
                    let db = (0..c)
                        .map(|j| dist2(b, &centers, j))
                        .fold(f64::INFINITY, f64::min);
                    da.partial_cmp(&db).unwrap()
                })
                .unwrap();
            centers.row_mut(c).copy_from(&points.row(far));
        }
        let mut labels = vec![0usize; n];
        for _ in 0..100 {
            let mut changed = false;
            for i in 0..n {
                let l = (0..k)
                    .min_by(|&a, &b| {
                        dist2(i, &centers, a)
                            .partial_cmp(&dist2(i, &centers, b))
                            .unwrap()
                    })
                    .unwrap();
                if l != labels[i] {
                    labels[i] = l;
                    changed = true;
                }
            }
            let mut sums = Matrix::zeros(k, points.ncols());
            let mut counts = vec![0usize; k];
            for i in 0..n {
                counts[labels[i]] += 1;
                for a in 0..points.ncols() {
                    sums[(labels[i], a)] += points[(i, a)];
                }
            }
            for c in 0..k {
                if counts[c] > 0 {
                    for a in 0..points.ncols() {
                        centers[(c, a)] = sums[(c, a)] / counts[c] as f64;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let inertia: f64 = (0..n).map(|i| dist2(i, &centers, labels[i])).sum();
        if best.as_ref().map_or(true, |(b, _)| inertia < *b) {
            best = Some((inertia, labels));
        }
    }
    best.unwrap().1
}

/// Best agreement between two labelings of `k` classes over label
/// permutations.
pub fn label_agreement(a: &[usize], b: &[usize], k: usize) -> f64 {
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = 0usize;
    permute(&mut perm, 0, &mut |p| {
        let hits = a.iter().zip(b).filter(|(x, y)| p[**x] == **y).count();
        best = best.max(hits);
    });
    best as f64 / a.len() as f64
}

fn permute(p: &mut Vec<usize>, i: usize, f: &mut impl FnMut(&[usize])) {
    if i == p.len() {
        f(p);
        return;
    }
    for j in i..p.len() {
        p.swap(i, j);
        permute(p, i + 1, f);
        p.swap(i, j);
    }
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with sign
/// correction).
pub fn random_orthogonal(d: usize, rng: &mut impl Rng) -> Matrix {
    let g = Matrix::from_fn(d, d, |_, _| {
        rng.sample::<f64, _>(rand_distr::StandardNormal)
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for c in 0..d {
        if r[(c, c)] < 0.0 {
            q.column_mut(c).neg_mut();
        }
    }
    q
}

/// Pair variances from full projection matrices, straight from the
/// definition.
pub fn upsilon_dense(x1: &Matrix, p1: &Matrix, x2: &Matrix, p2: &Matrix) -> Matrix {
    let n = x1.nrows();
    let proj = |x: &Matrix| -> Matrix {
        let g = (x.transpose() * x).try_inverse().unwrap();
        x * g * x.transpose()
    };
    let (pi1, pi2) = (proj(x1), proj(x2));
    let xi = |p: &Matrix, k: usize| -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |l, _| {
            p[(k, l)] * (1.0 - p[(k, l)])
        }))
    };
    let psi: Vec<Matrix> = (0..n)
        .map(|k| &pi1 * xi(p1, k) * &pi1 + &pi2 * xi(p2, k) * &pi2)
        .collect();
    Matrix::from_fn(n, n, |k, l| {
        if k == l {
            4.0 * psi[k][(k, k)]
        } else {
            psi[k][(l, l)]
                + psi[l][(k, k)]
                + 2.0 * pi1[(k, k)] * pi1[(l, l)] * p1[(k, l)] * (1.0 - p1[(k, l)])
                + 2.0 * pi2[(k, k)] * pi2[(l, l)] * p2[(k, l)] * (1.0 - p2[(k, l)])
        }
    })
}

/// Clipped plug-in probabilities of an embedding, computed directly.
pub fn clipped_probabilities(e: &Embedding) -> Matrix {
    let s = Matrix::from_diagonal(&nalgebra::DVector::from_vec(e.signature.diag()));
    (&e.xhat * s * e.xhat.transpose()).map(|v| v.clamp(0.0, 1.0))
}

/// Step-up selection by enumerating every candidate rejection threshold
/// `j alpha / m`; returns the sorted non-rejected set.
pub fn bh_bruteforce(p: &[f64], alpha: f64) -> Vec<usize> {
    let m = p.len();
    let mut tau = f64::NEG_INFINITY;
    for j in 1..=m {
        let level = j as f64 * alpha / m as f64;
        let below = p.iter().filter(|&&v| v <= level).count();
        if below >= j {
            tau = level;
        }
    }
    (0..m).filter(|&k| !(p[k] <= tau)).collect()
}

/// Profile likelihood split chosen by direct evaluation of Gaussian
/// log-densities.
pub fn elbow_bruteforce(mags: &[f64], max_d: usize) -> usize {
    use statrs::distribution::{Continuous, Normal};
    let p = mags.len();
    let mut best = (f64::NEG_INFINITY, 1usize);
    for q in 1..=max_d.min(p - 1) {
        let (a, b) = mags.split_at(q);
        let ma = mean(a);
        let mb = mean(b);
        let ss: f64 = a.iter().map(|x| (x - ma).powi(2)).sum::<f64>()
            + b.iter().map(|x| (x - mb).powi(2)).sum::<f64>();
        let sd = (ss / (p as f64 - 2.0)).sqrt();
        let ll = if sd == 0.0 {
            if ma != mb {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            }
        } else {
            let na = Normal::new(ma, sd).unwrap();
            let nb = Normal::new(mb, sd).unwrap();
            a.iter().map(|&x| na.ln_pdf(x)).sum::<f64>()
                + b.iter().map(|&x| nb.ln_pdf(x)).sum::<f64>()
        };
        if ll > best.0 {
            best = (ll, q);
        }
    }
    best.1
}

/// `|| x w - y ||_F` for the Procrustes-optimal orthogonal `w`, from an
/// independent SVD.
pub fn procrustes_residual(x: &Matrix, y: &Matrix) -> f64 {
    let svd = (x.transpose() * y).svd(true, true);
    let w = svd.u.unwrap() * svd.v_t.unwrap();
    (x * w - y).norm()
}

pub fn two_to_inf(m: &Matrix) -> f64 {
    (0..m.nrows()).map(|i| m.row(i).norm()).fold(0.0, f64::max)
}

/// Rotation `exp([v]_x)` by Rodrigues' formula.
pub fn rotation(v: &[f64; 3]) -> Matrix {
    let theta = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    let mut r = Matrix::identity(3, 3);
    if theta < 1e-300 {
        return r;
    }
    let k = Matrix::from_row_slice(
        3,
        3,
        &[0.0, -v[2], v[1], v[2], 0.0, -v[0], -v[1], v[0], 0.0],
    ) / theta;
    r += theta.sin() * &k + (1.0 - theta.cos()) * (&k * &k);
    r
}

/// Downhill simplex minimization from `start` with initial edge `step`.
pub fn nelder_mead(
    f: impl Fn(&[f64; 3]) -> f64,
    start: [f64; 3],
    step: f64,
    iters: usize,
) -> ([f64; 3], f64) {
    let mut simplex: Vec<([f64; 3], f64)> = (0..4)
        .map(|i| {
            let mut p = start;
            if i > 0 {
                p[i - 1] += step;
            }
            (p, f(&p))
        })
        .collect();
    let lerp = |a: &[f64; 3], b: &[f64; 3], t: f64| -> [f64; 3] {
        [
            a[0] + t * (b[0] - a[0]),
            a[1] + t * (b[1] - a[1]),
            a[2] + t * (b[2] - a[2]),
        ]
    };
    for _ in 0..iters {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[3].1 - simplex[0].1 <= 1e-12 * simplex[0].1.abs().max(1e-300) {
            break;
        }
        let mut c = [0.0; 3];
        for (p, _) in &simplex[..3] {
            for a in 0..3 {
                c[a] += p[a] / 3.0;
            }
        }
        let worst = simplex[3];
        let refl = lerp(&c, &worst.0, -1.0);
        let fr = f(&refl);
        if fr < simplex[0].1 {
            let exp = lerp(&c, &worst.0, -2.0);
            let fe = f(&exp);
            simplex[3] = if fe < fr { (exp, fe) } else { (refl, fr) };
        } else if fr < simplex[2].1 {
            simplex[3] = (refl, fr);
        } else {
            let con = lerp(&c, &worst.0, 0.5);
            let fc = f(&con);
            if fc < worst.1 {
                simplex[3] = (con, fc);
            } else {
                let best = simplex[0].0;
                for s in simplex.iter_mut().skip(1) {
                    s.0 = lerp(&best, &s.0, 0.5);
                    s.1 = f(&s.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex[0]
}

/// `min_W ||yhat W - y||_{2->inf}` over orthogonal 3x3 `W`, searched from
/// the Frobenius Procrustes solution in both of its components.
pub fn min_two_to_inf_3(yhat: &Matrix, y: &Matrix) -> f64 {
    let svd = (yhat.transpose() * y).svd(true, true);
    let w0 = svd.u.unwrap() * svd.v_t.unwrap();
    let mut flip = Matrix::identity(3, 3);
    flip[(2, 2)] = -1.0;
    let mut best = f64::INFINITY;
    for base in [w0.clone(), &w0 * flip] {
        let obj = |v: &[f64; 3]| two_to_inf(&(yhat * (&base * rotation(v)) - y));
        for step in [0.3, 1.0] {
            let (v, _) = nelder_mead(obj, [0.0; 3], step, 2000);
            let (_, fv) = nelder_mead(obj, v, 0.05, 2000);
            best = best.min(fv);
        }
    }
    best
}
