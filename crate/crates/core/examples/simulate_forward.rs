//! Runs the forward voter model on a small torus and tracks the occupation
//! time of the origin.

use std::sync::Arc;

use voterpath::lattice::TorusLattice;
use voterpath::parallel::map_replicas;
use voterpath::voter::{advance_to, init_product, OccupationRecorder};

fn main() -> voterpath::Result<()> {
    let (d, side, p) = (3, 21, 0.5);
    let grid = [1.0, 5.0, 20.0, 50.0];
    let lattice = Arc::new(TorusLattice::new(d, side)?);
    let reps = 64;
    let runs = map_replicas(reps, 7, "simulate-example", |_, rng| {
        let mut field = init_product(lattice.clone(), p, rng).expect("valid density");
        let mut rec = [OccupationRecorder::new(&field, lattice.origin(), &grid, p).expect("valid grid")];
        let stats = advance_to(&mut field, 50.0, &mut rec, rng).expect("valid horizon");
        let [rec] = rec;
        (rec.into_path().centered()[1..].to_vec(), stats.events, field.count_ones() as f64 / lattice.n_sites() as f64)
    });
    let events: u64 = runs.iter().map(|r| r.1).sum();
    println!("{reps} replicas on the {side}^{d} torus, {events} events");
    for (k, t) in grid.iter().enumerate() {
        let m = runs.iter().map(|r| r.0[k]).sum::<f64>() / reps as f64;
        let v = runs.iter().map(|r| (r.0[k] - m).powi(2)).sum::<f64>() / (reps - 1) as f64;
        println!("t = {t:>5}: mean centered occupation {m:>8.4}, variance {v:>8.4}");
    }
    let density = runs.iter().map(|r| r.2).sum::<f64>() / reps as f64;
    println!("final density {density:.4}");
    Ok(())
}
