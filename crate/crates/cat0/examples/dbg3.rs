use cat0::oracle::{generate_instance, random_point, visibility_distance, InstanceKind, Rng};
use std::time::Instant;

fn main() {
    let k = generate_instance(InstanceKind::FlatPolygon, 52, 5).unwrap();
    let mut rng = Rng::new(42);
    let a = random_point(&k, &mut rng);
    let t = Instant::now();
    let spm = cat0::spm::build_spm(&k, &a).unwrap();
    println!("build: {:.2?} ({} cones)", t.elapsed(), spm.n_cones());
    let t = Instant::now();
    for i in 0..15 {
        let b = random_point(&k, &mut rng);
        let dv = visibility_distance(&k, &a, &b).unwrap();
        println!("query {i} target {b:?} oracle done {:.2?}", t.elapsed());
        let dk = cat0::query::distance(&k, &spm, &b).unwrap();
        assert!((dk - dv).abs() < 1e-9, "{dk} vs {dv}");
    }
    println!("15 queries+oracle: {:.2?}", t.elapsed());
    let t = Instant::now();
    let opts = cat0::spm::VerifyOptions {
        coverage_samples: 150,
        convexity_pairs_per_cone: 6,
        seed: 5,
        oracle_eps: None,
    };
    let rep = cat0::spm::verify_spm(&spm, &opts).unwrap();
    println!("verify: {:.2?} pass={}", t.elapsed(), rep.pass);
}
