use std::time::Instant;
fn main() {
    use platewave::harness::*;
    use platewave::solve::Decomposition;
    let cfg = ScenarioConfig::default();
    for m in [Decomposition::UQ, Decomposition::QP] {
        let t0 = Instant::now();
        let rep = convergence_study(&cfg, &[0.05, 0.04, 0.03], 0.015,
            m, Decomposition::DecoupledQP, 1).unwrap();
        println!("{:?} vs decoupled ref: slope_u {:.3} slope_du {:.3} in {:.0?}", m, rep.slope_u, rep.slope_du, t0.elapsed());
        println!("  errors_u  {:?}", rep.errors_u);
        println!("  errors_du {:?}", rep.errors_du);
    }
}
