use theta_hyper::identities::*;
use theta_hyper::numeric::rel_diff;
use theta_hyper::sampling::Sampler;

#[test]
fn ft_sum_batch() {
    let mut rng = Sampler::new(100);
    for d in 0..50 {
        let nome = sample_nome(&mut rng).unwrap();
        let p = sample_ft(&mut rng, d % 7, &nome, DEFAULT_BAND).unwrap();
        let r = verify_ft_sum(&p, 1e-8).unwrap();
        assert!(r.pass, "draw {d}: {}", r.rel_err);
    }
}

#[test]
fn bailey_batch() {
    let mut rng = Sampler::new(101);
    for d in 0..30 {
        let nome = sample_nome(&mut rng).unwrap();
        let p = sample_bailey(&mut rng, d % 5, &nome, DEFAULT_BAND).unwrap();
        let r = verify_bailey(&p, 1e-8).unwrap();
        assert!(r.pass, "draw {d}: {}", r.rel_err);
    }
}

#[test]
fn multi1_batch() {
    let mut rng = Sampler::new(102);
    for rank in 1..=3 {
        for d in 0..20 {
            let nome = sample_nome(&mut rng).unwrap();
            let p = sample_multi1(&mut rng, rank, d % 5, &nome, DEFAULT_BAND).unwrap();
            let r = verify_multi1(&p, 1e-7).unwrap();
            assert!(r.pass, "rank {rank} draw {d}: {}", r.rel_err);
        }
    }
}

#[test]
fn multi2_batch() {
    let mut rng = Sampler::new(103);
    for rank in 1..=3usize {
        for _ in 0..20 {
            let nome = sample_nome(&mut rng).unwrap();
            let ns: Vec<u32> = (0..rank).map(|_| rng.integer(0, 3)).collect();
            let p = sample_multi2(&mut rng, &ns, &nome, DEFAULT_BAND).unwrap();
            let r = verify_multi2(&p, 1e-7).unwrap();
            assert!(r.pass, "rank {rank} {ns:?}: {}", r.rel_err);
        }
    }
    let _ = rel_diff;
}

#[test]
fn ge_split_batch() {
    let mut rng = Sampler::new(104);
    for d in 0..10 {
        let nome = sample_nome(&mut rng).unwrap();
        let p = sample_ge_split(&mut rng, 4, &nome, DEFAULT_BAND).unwrap();
        let r = verify_ge_split(&p, 1e-10).unwrap();
        assert!(r.pass, "draw {d}: {}", r.rel_err);
    }
}
