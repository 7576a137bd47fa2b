use cat0::complex::PointOnComplex;
use cat0::oracle::{generate_instance, random_point, visibility_distance, InstanceKind, Rng};
use cat0::spm::{verify_spm, VerifyOptions};

fn main() {
    let mut worst: f64 = 0.0;
    let mut fails = 0;
    let mut runs = 0;
    let mut verify_fails = 0;
    for kind in [InstanceKind::FlatConvex, InstanceKind::FlatPolygon] {
        for seed in 0..20u64 {
            let n = 12 + (seed as usize % 6) * 8;
            let k = generate_instance(kind, n, seed).unwrap();
            let mut rng = Rng::new(seed * 977 + 5);
            let mut sources: Vec<PointOnComplex> =
                (0..3).map(|_| random_point(&k, &mut rng)).collect();
            sources.push(PointOnComplex::Vertex(seed as usize % k.n_vertices()));
            for a in &sources {
                runs += 1;
                let spm = match cat0::spm::build_spm(&k, a) {
                    Ok(s) => s,
                    Err(e) => {
                        println!("BUILD FAIL {kind:?} n={n} seed={seed} src={a:?}: {e}");
                        fails += 1;
                        continue;
                    }
                };
                if runs % 7 == 0 {
                    let opts = VerifyOptions {
                        coverage_samples: 150,
                        convexity_pairs_per_cone: 6,
                        seed: seed,
                        oracle_eps: None,
                    };
                    let rep = verify_spm(&spm, &opts).unwrap();
                    if !rep.pass {
                        verify_fails += 1;
                        println!(
                            "VERIFY FAIL {kind:?} n={n} seed={seed}: {:?} (+{} more)",
                            rep.failures.first(),
                            rep.failures.len().saturating_sub(1)
                        );
                    }
                }
                for _ in 0..15 {
                    let b = random_point(&k, &mut rng);
                    let dv = visibility_distance(&k, a, &b).unwrap();
                    match cat0::query::distance(&k, &spm, &b) {
                        Ok(dk) => {
                            let err = (dk - dv).abs();
                            worst = worst.max(err);
                            if err > 1e-9 {
                                println!("MISMATCH {kind:?} n={n} seed={seed}: {dk} vs {dv}");
                                fails += 1;
                            }
                        }
                        Err(e) => {
                            println!("QUERY FAIL {kind:?} n={n} seed={seed}: {e}");
                            fails += 1;
                        }
                    }
                }
            }
        }
    }
    println!("{runs} builds; worst {worst:.3e}; fails {fails}; verify fails {verify_fails}");

    // curved band checks
    let mut band_fails = 0;
    for seed in 0..8u64 {
        let k = generate_instance(InstanceKind::Curved, 24, seed).unwrap();
        let mut rng = Rng::new(seed * 31 + 1);
        let a = random_point(&k, &mut rng);
        let spm = match cat0::spm::build_spm(&k, &a) {
            Ok(s) => s,
            Err(e) => {
                println!("CURVED BUILD FAIL seed={seed}: {e}");
                band_fails += 1;
                continue;
            }
        };
        let eps = 0.02;
        let net = cat0::oracle::EpsilonNet::build(&k, eps).unwrap();
        let targets: Vec<PointOnComplex> = (0..10).map(|_| random_point(&k, &mut rng)).collect();
        let nd = net.distances(&a, &targets).unwrap();
        for (i, b) in targets.iter().enumerate() {
            match cat0::query::distance(&k, &spm, b) {
                Ok(dk) => {
                    if dk > nd[i] + 1e-9 || nd[i] - dk > 0.05 * dk + eps {
                        println!("CURVED BAND seed={seed}: kernel {dk} net {}", nd[i]);
                        band_fails += 1;
                    }
                }
                Err(e) => {
                    println!("CURVED QUERY FAIL seed={seed}: {e}");
                    band_fails += 1;
                }
            }
        }
    }
    println!("curved band fails: {band_fails}");
}
