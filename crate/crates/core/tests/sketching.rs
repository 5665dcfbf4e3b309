use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tstat::{snap_curve, LshParams, Sketcher, Trajectory};

/// Moves every coordinate of `p` by less than its distance to the nearest
/// grid line of every hasher, so all snapped cell sequences are unchanged.
#[test]
fn sub_slack_perturbation_keeps_sketch() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let params = LshParams { len: 64, sigma_bits: 8, delta: 10.0, k: 2, seed: 77 };
    let sk = Sketcher::new(params, 2).unwrap();
    for _ in 0..50 {
        let m = rng.gen_range(1..10);
        let coords: Vec<f64> = (0..2 * m).map(|_| rng.gen_range(-100.0..100.0)).collect();
        let p = Trajectory::from_flat(0, 2, coords.clone()).unwrap();
        let mut slack = f64::INFINITY;
        for h in sk.hashers() {
            for pt in coords.chunks(2) {
                for (&x, &s) in pt.iter().zip(&h.shift) {
                    let r = (x + s).rem_euclid(params.delta);
                    slack = slack.min(r.min(params.delta - r));
                }
            }
        }
        let moved: Vec<f64> = coords.iter().map(|&x| x + rng.gen_range(-0.49..0.49) * slack).collect();
        let q = Trajectory::from_flat(1, 2, moved).unwrap();
        for h in sk.hashers() {
            assert_eq!(snap_curve(h, &p, params.delta).unwrap(), snap_curve(h, &q, params.delta).unwrap());
        }
        let (a, b) = (sk.sketch(&p).unwrap(), sk.sketch(&q).unwrap());
        assert_eq!(a.hamming(&b), 0);
    }
}

#[test]
fn nearby_curves_collide_more_than_distant_ones() {
    let params = LshParams::for_radius(1.0, 2, 5);
    let sk = Sketcher::new(params, 2).unwrap();
    let base: Vec<f64> = (0..20).flat_map(|i| [i as f64 * 3.0, (i as f64).sin() * 5.0]).collect();
    let p = Trajectory::from_flat(0, 2, base.clone()).unwrap();
    let near = Trajectory::from_flat(1, 2, base.iter().map(|x| x + 0.5).collect()).unwrap();
    let far = Trajectory::from_flat(2, 2, base.iter().map(|x| x + 500.0).collect()).unwrap();
    let s = sk.sketch(&p).unwrap();
    assert!(s.hamming(&sk.sketch(&near).unwrap()) < s.hamming(&sk.sketch(&far).unwrap()));
}

#[test]
fn negative_coordinates_use_floor() {
    let h = tstat::GridHasher { shift: vec![0.0], mix_seed: 0 };
    let p = Trajectory::from_flat(0, 1, vec![-0.5, -1.0, -1.5, 0.5]).unwrap();
    assert_eq!(snap_curve(&h, &p, 1.0).unwrap(), vec![-1, -2, 0]);
}
