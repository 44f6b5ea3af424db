//! The fourth-moment bound used for tightness.
//!
//! `E[prod_j (eta_{t_j}(x_j) - p)]` is estimated from forward voter
//! ensembles and compared with the sum over the three pairings of products
//! of pairwise meeting probabilities of independent, staggered dual walks.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::meeting::meeting_prob_offset;
use crate::error::{Error, Result};
use crate::lattice::{Geometry, TorusLattice};
use crate::parallel::try_map_replicas;
use crate::rng::RngSeed;
use crate::voter::{advance_to, init_product, MeanEstimate, SpinField};

/// `int prod_j (eta(z_j) - p) d nu_p` for the coincidence pattern `classes`
/// (`classes[j]` labels the site of `z_j`; equal labels mean equal sites).
pub fn nu_moment4(classes: [usize; 4], p: f64) -> f64 {
    let q = 1.0 - p;
    let mut sizes: Vec<usize> = Vec::new();
    let mut seen: Vec<usize> = Vec::new();
    for &c in &classes {
        match seen.iter().position(|&s| s == c) {
            Some(i) => sizes[i] += 1,
            None => {
                seen.push(c);
                sizes.push(1);
            }
        }
    }
    if sizes.contains(&1) {
        return 0.0;
    }
    if sizes.len() == 1 {
        p * q.powi(4) + q * p.powi(4)
    } else {
        let pair = p * q * q + q * p * p;
        pair * pair
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourPointReport {
    pub times: [f64; 4],
    pub sites: [Vec<i64>; 4],
    pub lhs: f64,
    pub lhs_stderr: f64,
    /// Sum over pairings of products of meeting probabilities.
    pub rhs: f64,
    pub rhs_stderr: f64,
    pub pass: bool,
}

/// Configuration of [`fourpoint_bound_check`].
#[derive(Clone, Copy, Debug)]
pub struct FourPointRun {
    pub side: usize,
    pub p: f64,
    pub forward_reps: usize,
    pub dual_reps: usize,
    pub seed: u64,
}

/// Pairings of `{0, 1, 2, 3}` into two pairs.
const PAIRINGS: [[(usize, usize); 2]; 3] = [[(0, 1), (2, 3)], [(0, 2), (1, 3)], [(0, 3), (1, 2)]];

pub fn fourpoint_bound_check(times: [f64; 4], sites: [Vec<i64>; 4], run: FourPointRun) -> Result<FourPointReport> {
    if !times.windows(2).all(|w| w[0] <= w[1]) || !(times[0] >= 0.0) || !times[3].is_finite() {
        return Err(Error::invalid(format!("times must satisfy 0 <= t1 <= t2 <= t3 <= t4: {times:?}")));
    }
    let d = sites[0].len();
    if sites.iter().any(|s| s.len() != d) {
        return Err(Error::invalid("all sites must have the same dimension"));
    }
    for i in 0..4 {
        for j in i + 1..4 {
            if sites[i] == sites[j] {
                return Err(Error::invalid("the four sites must be distinct"));
            }
        }
    }
    if !(0.0..=1.0).contains(&run.p) {
        return Err(Error::invalid(format!("density p must lie in [0, 1], got {}", run.p)));
    }
    let lattice = Arc::new(TorusLattice::new(d, run.side)?);
    let n = lattice.n_sites();
    // shifted[j][z] = index of z + x_j.
    let shifted: Vec<Vec<u32>> = sites
        .iter()
        .map(|x| {
            (0..n)
                .map(|z| {
                    let c: Vec<i64> = lattice.coords(z).iter().zip(x).map(|(&a, &b)| a as i64 + b).collect();
                    lattice.site_of(&c) as u32
                })
                .collect()
        })
        .collect();

    let p = run.p;
    let samples = try_map_replicas(run.forward_reps, run.seed, "fourpoint-forward", |_, rng| {
        let mut field = init_product(Arc::clone(&lattice), p, rng)?;
        let mut snaps: Vec<SpinField> = Vec::with_capacity(4);
        for &t in &times {
            advance_to(&mut field, t, &mut [], rng)?;
            snaps.push(field.clone());
        }
        // Average over all translates of the pattern.
        let mut acc = 0.0;
        for z in 0..n {
            let mut prod = 1.0;
            for j in 0..4 {
                let on = snaps[j].get(shifted[j][z] as usize);
                prod *= if on { 1.0 - p } else { -p };
            }
            acc += prod;
        }
        Ok(acc / n as f64)
    })?;
    let lhs = MeanEstimate::from_samples(&samples);

    let geometry = Geometry::Torus { side: run.side };
    let mut rhs = 0.0;
    let mut rhs_var = 0.0;
    for (k, pairing) in PAIRINGS.iter().enumerate() {
        let mut probs = [(0.0, 0.0); 2];
        for (slot, &(i, j)) in pairing.iter().enumerate() {
            let (first, second) = if times[i] >= times[j] { (i, j) } else { (j, i) };
            let seed = RngSeed::for_replica(run.seed, "fourpoint-pair", (2 * k + slot) as u64).stream_id;
            let m = meeting_prob_offset(
                &sites[first],
                &sites[second],
                times[first] - times[second],
                times[second],
                run.dual_reps,
                seed,
                geometry,
            )?;
            probs[slot] = (m.prob, m.stderr);
        }
        let ((a, sa), (b, sb)) = (probs[0], probs[1]);
        rhs += a * b;
        rhs_var += b * b * sa * sa + a * a * sb * sb;
    }
    Ok(FourPointReport {
        times,
        sites,
        lhs: lhs.mean,
        lhs_stderr: lhs.stderr,
        rhs,
        rhs_stderr: rhs_var.sqrt(),
        pass: lhs.mean <= rhs + 3.0 * lhs.stderr,
    })
}
