//! Runtime of recognition and pose prediction over a grid of object counts
//! and demonstration lengths.

use std::fmt::Write as _;
use std::time::Instant;

use ism_tree::model::ObjectState;
use ism_tree::prediction::{compute_shortest_paths, generate_cloud_of_pose_predictions, RandomSampler};
use ism_tree::recognition::RecognitionParams;
use ism_tree::tree::recognize_scene;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::measure::{build_tree, star_topology};
use crate::perturb::{generate_perturbed_test_set, PerturbationKind, PerturbationSpec};
use crate::scenario::{generate_demonstration, MotionModel, ScenarioSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BenchParams {
    /// Distinct configurations per cell.
    pub configurations: usize,
    /// Timed calls per cell at least ...
    pub min_calls: usize,
    /// ... and keep calling until this much time was spent, up to `max_calls`.
    pub min_seconds: f64,
    pub max_calls: usize,
    pub seed: u64,
    pub recognition: RecognitionParams,
}

impl Default for BenchParams {
    fn default() -> Self {
        Self { configurations: 5, min_calls: 5, min_seconds: 0.05, max_calls: 2000, seed: 0, recognition: RecognitionParams::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    pub l: usize,
    pub mean_s: f64,
    pub std_s: f64,
}

fn cell_spec(n: usize, l: usize, seed: u64) -> ScenarioSpec {
    let motion = MotionModel::Jitter { sigma_pos: 0.02, sigma_rot_deg: 3.0 };
    ScenarioSpec::new("bench", n, l, motion, seed ^ ((n as u64) << 32) ^ l as u64)
}

fn timed(params: &BenchParams, mut call: impl FnMut(usize) -> Result<()>) -> Result<(f64, f64)> {
    call(0)?;
    let mut samples = Vec::new();
    let mut spent = 0.0;
    while samples.len() < params.max_calls.max(1) && (samples.len() < params.min_calls.max(1) || spent < params.min_seconds) {
        let start = Instant::now();
        call(samples.len())?;
        let s = start.elapsed().as_secs_f64();
        spent += s;
        samples.push(s);
    }
    Ok(mean_std(&samples))
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, var.sqrt())
}

/// Seconds per scene recognition with a star-topology tree, per cell.
pub fn bench_recognition(grid: &[(usize, usize)], params: &BenchParams) -> Result<Vec<BenchRow>> {
    if grid.is_empty() {
        return Err(HarnessError::EmptyGrid);
    }
    let mut rows = Vec::new();
    for &(n, l) in grid {
        let spec = cell_spec(n, l, params.seed);
        let ds = generate_demonstration(&spec)?;
        let tree = build_tree(&ds, &star_topology(&ds))?;
        let mut shift = PerturbationSpec::new(PerturbationKind::Shift, 0.01, params.configurations.max(1), spec.seed);
        shift.position_tolerance = params.recognition.position_tolerance;
        let configs = generate_perturbed_test_set(&ds, &shift)?;
        let (mean_s, std_s) = timed(params, |k| {
            std::hint::black_box(recognize_scene(&configs[k % configs.len()].objects, &tree, &params.recognition)?);
            Ok(())
        })?;
        rows.push(BenchRow { n, l, mean_s, std_s });
    }
    Ok(rows)
}

/// Seconds to predict `n_p` poses for every object but one, per cell. The
/// instance comes from a configuration holding only the star center.
pub fn bench_prediction(grid: &[(usize, usize)], n_p: usize, params: &BenchParams) -> Result<Vec<BenchRow>> {
    if grid.is_empty() {
        return Err(HarnessError::EmptyGrid);
    }
    let permissive = RecognitionParams { result_keep_threshold: 0.0, assembly_threshold: 0.0, ..params.recognition };
    let mut rows = Vec::new();
    for &(n, l) in grid {
        let spec = cell_spec(n, l, params.seed);
        let ds = generate_demonstration(&spec)?;
        let tree = build_tree(&ds, &star_topology(&ds))?;
        let center: Vec<ObjectState> = ds.configuration_at(0).into_iter().take(1).collect();
        let instances = recognize_scene(&center, &tree, &permissive)?;
        let instance = instances.first().ok_or_else(|| HarnessError::InvalidScenario("no instance for the prediction benchmark".into()))?;
        let paths = compute_shortest_paths(&tree);
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let (mean_s, std_s) = timed(params, |_| {
            let cloud = generate_cloud_of_pose_predictions(instance, &tree, &paths, n_p, &mut RandomSampler(&mut rng))?;
            std::hint::black_box(cloud);
            Ok(())
        })?;
        rows.push(BenchRow { n, l, mean_s, std_s });
    }
    Ok(rows)
}

pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("n,l,mean_s,std_s\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{:.9},{:.9}", r.n, r.l, r.mean_s, r.std_s);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y = slope * x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> LinearFit {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    LinearFit { slope, intercept, r_squared }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cell_gives_single_row() {
        let params = BenchParams { min_seconds: 0.0, ..BenchParams::default() };
        let rows = bench_recognition(&[(3, 25)], &params).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!((rows[0].n, rows[0].l), (3, 25));
        assert!(rows[0].mean_s > 0.0);
        let csv = to_csv(&rows);
        assert!(csv.starts_with("n,l,mean_s,std_s\n3,25,"));
        assert_eq!(bench_prediction(&[(3, 25)], 10, &params).unwrap().len(), 1);
        assert!(matches!(bench_recognition(&[], &params), Err(HarnessError::EmptyGrid)));
    }

    #[test]
    fn exact_line_fits_perfectly() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [3.0, 5.0, 7.0, 9.0];
        let fit = linear_fit(&xs, &ys);
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!((fit.intercept - 1.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }
}
