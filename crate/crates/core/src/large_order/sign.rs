//! Sign structure of non-alternating rows: `sgn a_n` against
//! `sgn cos(a n + b)`.

use num_traits::{Signed, Zero};
use serde::Serialize;

use super::LargeOrderError;
use crate::exact::{BigFloat, Rational};

/// `|cos(a n + b)|` below this makes the sign of the model ambiguous.
const PHASE_TOLERANCE: f64 = 1e-9;
/// Peaks closer than this in both coordinates are merged.
const MERGE_DISTANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignFit {
    pub a: f64,
    pub b: f64,
    /// `sum_n sgn cos(a n + b) sgn a_n`
    pub score: i64,
    /// Orders where the signs disagree.
    pub mismatches: Vec<usize>,
}

fn row_signs(row: &[Rational]) -> Result<Vec<i8>, LargeOrderError> {
    row.iter()
        .enumerate()
        .skip(1)
        .map(|(n, c)| {
            if c.is_zero() {
                Err(LargeOrderError::ZeroCoefficient(n))
            } else if c.is_positive() {
                Ok(1)
            } else {
                Ok(-1)
            }
        })
        .collect()
}

/// Scores `row[1..]` (`row[n]` holds `a_n`) against `cos(a n + b)`.
pub fn sign_score(row: &[Rational], a: f64, b: f64) -> Result<SignFit, LargeOrderError> {
    let signs = row_signs(row)?;
    score_signs(&signs, a, b)
}

fn score_signs(signs: &[i8], a: f64, b: f64) -> Result<SignFit, LargeOrderError> {
    let mut score = 0;
    let mut mismatches = Vec::new();
    for (i, &s) in signs.iter().enumerate() {
        let n = i + 1;
        let c = (a * n as f64 + b).cos();
        if c.abs() < PHASE_TOLERANCE {
            return Err(LargeOrderError::AmbiguousPhase(n));
        }
        if (c > 0.0) == (s > 0) {
            score += 1;
        } else {
            score -= 1;
            mismatches.push(n);
        }
    }
    Ok(SignFit { a, b, score, mismatches })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSearch {
    pub a_range: (f64, f64),
    pub b_range: (f64, f64),
    /// Cells per axis on the first pass.
    pub resolution: usize,
    /// Zoom levels around each peak, each 10x narrower.
    pub refine_depth: usize,
    /// Cells per axis on the zoomed passes.
    pub refine_resolution: usize,
    pub jobs: usize,
}

impl GridSearch {
    pub fn new(a_range: (f64, f64), b_range: (f64, f64)) -> Self {
        Self { a_range, b_range, resolution: 2000, refine_depth: 3, refine_resolution: 200, jobs: 1 }
    }
}

struct Grid {
    a0: f64,
    da: f64,
    b0: f64,
    db: f64,
    na: usize,
    nb: usize,
    scores: Vec<i32>,
}

impl Grid {
    /// Scores at cell centres. Row `i` is `a`, column `k` is `b`.
    fn evaluate(signs: &[i8], a: (f64, f64), b: (f64, f64), na: usize, nb: usize, jobs: usize) -> Self {
        let da = (a.1 - a.0) / na as f64;
        let db = (b.1 - b.0) / nb as f64;
        let (cb, sb): (Vec<f64>, Vec<f64>) = (0..nb)
            .map(|k| {
                let x = b.0 + (k as f64 + 0.5) * db;
                (x.cos(), x.sin())
            })
            .unzip();
        let mut scores = vec![0i32; na * nb];
        let chunk = na.div_ceil(jobs.max(1)).max(1);
        std::thread::scope(|s| {
            for (c, out) in scores.chunks_mut(chunk * nb).enumerate() {
                let (cb, sb) = (&cb, &sb);
                s.spawn(move || {
                    let mut ca = vec![0.0; signs.len()];
                    let mut sa = vec![0.0; signs.len()];
                    for (r, row) in out.chunks_mut(nb).enumerate() {
                        let av = a.0 + ((c * chunk + r) as f64 + 0.5) * da;
                        for (i, (x, y)) in ca.iter_mut().zip(sa.iter_mut()).enumerate() {
                            let t = av * (i + 1) as f64;
                            *x = t.cos();
                            *y = t.sin();
                        }
                        for (k, cell) in row.iter_mut().enumerate() {
                            let (cbk, sbk) = (cb[k], sb[k]);
                            let mut acc = 0i32;
                            for i in 0..signs.len() {
                                // cos(an + b) = cos(an) cos b - sin(an) sin b
                                let v = ca[i] * cbk - sa[i] * sbk;
                                acc += if (v >= 0.0) == (signs[i] > 0) { 1 } else { -1 };
                            }
                            *cell = acc;
                        }
                    }
                });
            }
        });
        Self { a0: a.0, da, b0: b.0, db, na, nb, scores }
    }

    fn max(&self) -> i32 {
        *self.scores.iter().max().expect("nonempty grid")
    }

    fn centre(&self, i: usize, k: usize) -> (f64, f64) {
        (self.a0 + (i as f64 + 0.5) * self.da, self.b0 + (k as f64 + 0.5) * self.db)
    }

    /// Connected groups of cells scoring `target`, as cell lists.
    fn clusters(&self, target: i32) -> Vec<Vec<(usize, usize)>> {
        let mut seen = vec![false; self.scores.len()];
        let mut out = Vec::new();
        for start in 0..self.scores.len() {
            if seen[start] || self.scores[start] != target {
                continue;
            }
            let mut stack = vec![start];
            seen[start] = true;
            let mut cells = Vec::new();
            while let Some(idx) = stack.pop() {
                let (i, k) = (idx / self.nb, idx % self.nb);
                cells.push((i, k));
                let mut push = |ii: usize, kk: usize| {
                    let j = ii * self.nb + kk;
                    if !seen[j] && self.scores[j] == target {
                        seen[j] = true;
                        stack.push(j);
                    }
                };
                if i > 0 {
                    push(i - 1, k);
                }
                if i + 1 < self.na {
                    push(i + 1, k);
                }
                if k > 0 {
                    push(i, k - 1);
                }
                if k + 1 < self.nb {
                    push(i, k + 1);
                }
            }
            out.push(cells);
        }
        out
    }

    fn mean(&self, cells: &[(usize, usize)]) -> (f64, f64) {
        let (sa, sb) = cells.iter().fold((0.0, 0.0), |(x, y), &(i, k)| {
            let (a, b) = self.centre(i, k);
            (x + a, y + b)
        });
        (sa / cells.len() as f64, sb / cells.len() as f64)
    }
}

/// All peaks of the sign score over a rectangle. Every connected region of
/// maximal score on the first pass is zoomed into `refine_depth` times; the
/// reported point is the centroid of the best cells on the last pass,
/// rescored exactly.
pub fn sign_grid_search(row: &[Rational], search: &GridSearch) -> Result<Vec<SignFit>, LargeOrderError> {
    let signs = row_signs(row)?;
    let grid = Grid::evaluate(&signs, search.a_range, search.b_range, search.resolution, search.resolution, search.jobs);
    let best = grid.max();
    let mut peaks: Vec<SignFit> = Vec::new();
    for cells in grid.clusters(best) {
        let (mut a, mut b) = grid.mean(&cells);
        let (mut wa, mut wb) = (10.0 * grid.da, 10.0 * grid.db);
        for _ in 0..search.refine_depth {
            let r = search.refine_resolution;
            let g = Grid::evaluate(&signs, (a - wa / 2.0, a + wa / 2.0), (b - wb / 2.0, b + wb / 2.0), r, r, search.jobs);
            let top = g.max();
            // follow the region containing the most cells
            let region = g.clusters(top).into_iter().max_by_key(|c| c.len()).expect("nonempty");
            (a, b) = g.mean(&region);
            wa /= 10.0;
            wb /= 10.0;
        }
        let fit = match score_signs(&signs, a, b) {
            Ok(f) => f,
            // a centroid exactly on a node is vanishingly unlikely; nudge it
            Err(_) => score_signs(&signs, a + 1e-12, b)?,
        };
        if !peaks.iter().any(|p| (p.a - fit.a).abs() < MERGE_DISTANCE && (p.b - fit.b).abs() < MERGE_DISTANCE) {
            peaks.push(fit);
        }
    }
    peaks.sort_by(|x, y| y.score.cmp(&x.score).then(x.a.total_cmp(&y.a)));
    Ok(peaks)
}

/// Best fit with the phase pinned to 0 or π (a pure `±cos(a n)`), scanning
/// `a` on `resolution` points and zooming `refine_depth` times.
pub fn best_phase_free(row: &[Rational], a_range: (f64, f64), resolution: usize, refine_depth: usize) -> Result<SignFit, LargeOrderError> {
    let signs = row_signs(row)?;
    let mut best: Option<SignFit> = None;
    for b in [0.0, std::f64::consts::PI] {
        let mut range = a_range;
        let mut local: Option<SignFit> = None;
        for _ in 0..=refine_depth {
            let step = (range.1 - range.0) / resolution as f64;
            for i in 0..resolution {
                let a = range.0 + (i as f64 + 0.5) * step;
                let Ok(fit) = score_signs(&signs, a, b) else { continue };
                if local.as_ref().is_none_or(|l| fit.score > l.score) {
                    local = Some(fit);
                }
            }
            let centre = local.as_ref().map(|l| l.a).unwrap_or((range.0 + range.1) / 2.0);
            let half = 5.0 * step;
            range = (centre - half, centre + half);
        }
        if let Some(l) = local {
            if best.as_ref().is_none_or(|bst| l.score > bst.score) {
                best = Some(l);
            }
        }
    }
    best.ok_or(LargeOrderError::Empty)
}

/// `a'_j = a_j / cos(a j + b)`, `b_j = a'_j / j!` and the ratio diagnostic.
#[derive(Debug, Clone)]
pub struct NormalizedRow {
    /// Index 0 is `j = 1`.
    pub aprime: Vec<BigFloat>,
    pub bnorm: Vec<BigFloat>,
    /// `b_{j+1} / b_j`, index 0 is `j = 1`.
    pub ratios: Vec<BigFloat>,
    /// First `j` where the ratio sequence reverses direction.
    pub oscillation_onset: Option<usize>,
}

pub fn normalize_row(row: &[Rational], a: f64, b: f64, prec: usize) -> Result<NormalizedRow, LargeOrderError> {
    let af = BigFloat::from_f64(a, prec);
    let bf = BigFloat::from_f64(b, prec);
    let mut aprime = Vec::new();
    let mut bnorm = Vec::new();
    let mut fact = BigFloat::one(prec);
    for (j, c) in row.iter().enumerate().skip(1) {
        let cosv = (&af * &BigFloat::from_i64(j as i64, prec) + &bf).cos();
        if cosv.abs() < BigFloat::from_f64(PHASE_TOLERANCE, prec) {
            return Err(LargeOrderError::AmbiguousPhase(j));
        }
        fact = fact * BigFloat::from_i64(j as i64, prec);
        let ap = BigFloat::from_rational(c, prec) / cosv;
        bnorm.push(&ap / &fact);
        aprime.push(ap);
    }
    let ratios: Vec<BigFloat> = bnorm.windows(2).map(|w| &w[1] / &w[0]).collect();
    let noise = BigFloat::from_i64(2, prec).powi(-(prec as i64) + 32);
    let mut last_sign = 0;
    let mut oscillation_onset = None;
    for (i, w) in ratios.windows(2).enumerate() {
        let d = &w[1] - &w[0];
        if d.abs() <= &noise * &w[0].abs() {
            continue;
        }
        let s = d.signum();
        if last_sign != 0 && s != last_sign {
            oscillation_onset = Some(i + 1);
            break;
        }
        last_sign = s;
    }
    Ok(NormalizedRow { aprime, bnorm, ratios, oscillation_onset })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(a: f64, b: f64, n: usize) -> Vec<Rational> {
        std::iter::once(Rational::zero())
            .chain((1..=n).map(|k| {
                let v = if (a * k as f64 + b).cos() > 0.0 { 1 } else { -1 };
                Rational::from_integer(v.into())
            }))
            .collect()
    }

    #[test]
    fn planted_signs_score_full() {
        let row = synthetic(1.3941, 3.09, 300);
        let fit = sign_score(&row, 1.3941, 3.09).unwrap();
        assert_eq!(fit.score, 300);
        assert!(fit.mismatches.is_empty());
        let flipped = sign_score(&row, 1.3941, 3.09 + std::f64::consts::PI).unwrap();
        assert_eq!(flipped.score, -300);
        assert_eq!(flipped.mismatches.len(), 300);
    }

    #[test]
    fn score_bounds_and_periodicity() {
        let row = synthetic(1.3941, 3.09, 101);
        let tau = std::f64::consts::TAU;
        for &(a, b) in &[(0.3, 0.1), (2.0, 1.0), (7.0, 3.0)] {
            let s = sign_score(&row, a, b).unwrap();
            assert!(s.score.abs() <= 101);
            assert_eq!(s.score.rem_euclid(2), 1);
            assert_eq!(s.score, 101 - 2 * s.mismatches.len() as i64);
            assert_eq!(sign_score(&row, a + tau, b).unwrap().score, s.score);
            assert_eq!(sign_score(&row, a, b + tau).unwrap().score, s.score);
        }
    }

    #[test]
    fn errors() {
        let mut row = synthetic(1.0, 0.5, 10);
        assert!(matches!(sign_score(&row, std::f64::consts::FRAC_PI_2, 0.0), Err(LargeOrderError::AmbiguousPhase(1))));
        row[4] = Rational::zero();
        assert_eq!(sign_score(&row, 1.0, 0.5), Err(LargeOrderError::ZeroCoefficient(4)));
    }

    #[test]
    fn grid_search_finds_planted_peak() {
        let row = synthetic(1.3941, 3.09, 120);
        let mut search = GridSearch::new((1.0, 2.0), (2.8, 3.3));
        search.resolution = 300;
        search.refine_resolution = 60;
        let peaks = sign_grid_search(&row, &search).unwrap();
        assert_eq!(peaks[0].score, 120);
        assert!(peaks.iter().any(|p| (p.a - 1.3941).abs() < 2e-3 && (p.b - 3.09).abs() < 0.1));
    }

    #[test]
    fn constant_signs_fit_small_frequency() {
        let row: Vec<Rational> = (0..=50).map(|_| Rational::from_integer(1.into())).collect();
        assert_eq!(sign_score(&row, 1e-3, 0.0).unwrap().score, 50);
        let fit = best_phase_free(&row, (0.0, 0.02), 100, 1).unwrap();
        assert_eq!(fit.score, 50);
    }

    #[test]
    fn normalization_of_planted_factorial_row() {
        let (a, b) = (1.3941, 3.09);
        let prec = 256;
        let c = Rational::new(3.into(), 2.into());
        // a_j = cos(a j + b) j! c^j, rounded to an exact rational
        let af = BigFloat::from_f64(a, prec);
        let bf = BigFloat::from_f64(b, prec);
        let mut fact = BigFloat::one(prec);
        let mut row = vec![Rational::zero()];
        for j in 1..=40i64 {
            fact = fact * BigFloat::from_i64(j, prec);
            let cj = BigFloat::from_rational(&c, prec).powi(j);
            let v = (&af * &BigFloat::from_i64(j, prec) + &bf).cos() * &fact * cj;
            row.push(v.to_rational());
        }
        let norm = normalize_row(&row, a, b, prec).unwrap();
        for r in &norm.ratios {
            assert!((r.to_f64() - 1.5).abs() < 1e-60);
        }
        assert_eq!(norm.oscillation_onset, None);
        let first = normalize_row(&[Rational::zero(), Rational::from_integer((-2).into())], a, b, prec).unwrap();
        let expected = -2.0 / (a + b).cos();
        assert!((first.aprime[0].to_f64() - expected).abs() < 1e-12);
        assert!((first.aprime[0].to_f64() - 8.8374).abs() < 1e-3);
    }
}
