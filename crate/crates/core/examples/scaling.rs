//! Wall-clock scaling of the full expansion on dense random matrices.
//!
//! `cargo run --release --example scaling [n ...]`

use std::time::Instant;

use num_bigint::BigUint;

use maxplus_csr::charpoly::characteristic_roots;
use maxplus_csr::csr::expand_from;
use maxplus_csr::oracle::random_matrix;
use maxplus_csr::partition::partition_nodes;
use maxplus_csr::visualize::visualize_all;

fn main() {
    let sizes: Vec<usize> = std::env::args().skip(1).filter_map(|s| s.parse().ok()).collect();
    let sizes = if sizes.is_empty() { vec![50, 100, 200, 300] } else { sizes };
    println!("{:>5} {:>6} {:>6} {:>10} {:>10} {:>10} {:>10} {:>10}", "n", "roots", "terms", "roots_ms", "vis_ms", "factor_ms", "total_ms", "eval_ms");
    for n in sizes {
        let a = random_matrix(n as u64, n, 1.0, -100, 100);
        let start = Instant::now();
        let mmcs = characteristic_roots(&a).expect("roots");
        let t_roots = start.elapsed();
        let part = partition_nodes(&mmcs, n).expect("partition");
        let vis = visualize_all(&a, &part).expect("visualization");
        let t_vis = start.elapsed() - t_roots;
        let x = expand_from(&a, &part, &vis).expect("factors");
        let total = start.elapsed();
        let t = BigUint::from(10u64).pow(18);
        let eval_start = Instant::now();
        x.evaluate(&t).expect("evaluation");
        let t_eval = eval_start.elapsed();
        println!(
            "{:>5} {:>6} {:>6} {:>10.1} {:>10.1} {:>10.1} {:>10.1} {:>10.1}",
            n,
            mmcs.roots.len(),
            x.terms.len(),
            t_roots.as_secs_f64() * 1e3,
            t_vis.as_secs_f64() * 1e3,
            (total - t_roots - t_vis).as_secs_f64() * 1e3,
            total.as_secs_f64() * 1e3,
            t_eval.as_secs_f64() * 1e3,
        );
    }
}
