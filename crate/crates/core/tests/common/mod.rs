#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use ridge_trace::dataset;
use ridge_trace::model::{self, CanonicalForm, StandardizedModel, Table};

pub const FULL: [&str; 4] = ["p3ca", "p3cs", "p4caf", "p2cs"];

pub fn portland_model(xs: &[&str]) -> StandardizedModel {
    model::standardize(&dataset::portland(), "heat", xs).unwrap()
}

pub fn portland(xs: &[&str]) -> (StandardizedModel, CanonicalForm) {
    let m = portland_model(xs);
    let cf = model::canonicalize(&m).unwrap();
    (m, cf)
}

/// Least-squares oracle on the raw columns via nalgebra's SVD solver:
/// returns (slopes, intercept, R²).
pub fn ols_oracle(table: &Table, y: &str, xs: &[&str]) -> (Vec<f64>, f64, f64) {
    let n = table.n_rows();
    let mut design = DMatrix::from_element(n, xs.len() + 1, 1.0);
    for (k, name) in xs.iter().enumerate() {
        for (i, v) in table.column(name).unwrap().iter().enumerate() {
            design[(i, k + 1)] = *v;
        }
    }
    let yv = DVector::from_column_slice(table.column(y).unwrap());
    let sol = design.clone().svd(true, true).solve(&yv, 1e-14).unwrap();
    let resid = &yv - &design * &sol;
    let mean = yv.mean();
    let tss: f64 = yv.iter().map(|v| (v - mean).powi(2)).sum();
    let r2 = 1.0 - resid.norm_squared() / tss;
    (sol.as_slice()[1..].to_vec(), sol[0], r2)
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let sab: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let saa: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let sbb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    sab / (saa * sbb).sqrt()
}

/// A random regression table with columns `y, x1 … xp`; predictors share a
/// common factor so some instances are badly conditioned.
pub fn random_table(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Table {
    let mix: f64 = rng.random_range(0.0..0.95);
    let common: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let mut cols = Vec::with_capacity(p + 1);
    for _ in 0..p {
        let col: Vec<f64> = common
            .iter()
            .map(|c| {
                let e: f64 = rng.sample(StandardNormal);
                mix * c + (1.0 - mix) * e
            })
            .collect();
        cols.push(col);
    }
    let beta: Vec<f64> = (0..p).map(|_| rng.random_range(-2.0..2.0)).collect();
    let noise: f64 = rng.random_range(0.1..3.0);
    let y: Vec<f64> = (0..n)
        .map(|i| {
            let e: f64 = rng.sample(StandardNormal);
            (0..p).map(|j| beta[j] * cols[j][i]).sum::<f64>() + noise * e
        })
        .collect();
    let mut names = vec!["y".to_owned()];
    names.extend((1..=p).map(|j| format!("x{j}")));
    let mut columns = vec![y];
    columns.extend(cols);
    Table::new(names, columns).unwrap()
}

pub fn random_instance(seed: u64, n: usize, p: usize) -> (StandardizedModel, CanonicalForm) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let table = random_table(&mut rng, n, p);
    let xs: Vec<String> = (1..=p).map(|j| format!("x{j}")).collect();
    let xs: Vec<&str> = xs.iter().map(String::as_str).collect();
    let m = model::standardize(&table, "y", &xs).unwrap();
    let cf = model::canonicalize(&m).unwrap();
    (m, cf)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
