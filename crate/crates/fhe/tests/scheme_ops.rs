//! Encrypt/decrypt round-trips and homomorphic operation checks against
//! plaintext oracles, on small parameter sets for speed.

use std::sync::Arc;

use fhe::ring::Sampler;
use fhe::scheme::keygen;
use fhe::{Context, EncryptionParameters, Scheme};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

const T: u64 = 65537;

fn small_ctx(scheme: Scheme) -> Arc<Context> {
    let params = match scheme {
        Scheme::Bfv | Scheme::Bgv => {
            EncryptionParameters::custom(scheme, 256, vec![40, 40], Some(T), None).unwrap()
        }
        Scheme::Ckks => {
            EncryptionParameters::custom(scheme, 256, vec![46, 40, 40], None, Some(40)).unwrap()
        }
    };
    Context::new(params).unwrap()
}

fn rand_slots(rng: &mut ChaCha20Rng, count: usize) -> Vec<u64> {
    (0..count).map(|_| rng.gen_range(0..T)).collect()
}

#[test]
fn bfv_bgv_roundtrip() {
    for scheme in [Scheme::Bfv, Scheme::Bgv] {
        let ctx = small_ctx(scheme);
        let mut sampler = Sampler::from_seed([9u8; 32]);
        let (sk, pk, _) = keygen(&ctx, &mut sampler).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for _ in 0..50 {
            let values = rand_slots(&mut rng, ctx.slot_count().unwrap());
            let pt = ctx.encode_integers(&values).unwrap();
            let ct = ctx.encrypt(&pk, &pt, &mut sampler).unwrap();
            let dec = ctx.decrypt(&sk, &ct).unwrap();
            assert_eq!(ctx.decode_integers(&dec).unwrap(), values, "{scheme:?}");
        }
    }
}

#[test]
fn ckks_roundtrip_precision() {
    let ctx = small_ctx(Scheme::Ckks);
    let mut sampler = Sampler::from_seed([10u8; 32]);
    let (sk, pk, _) = keygen(&ctx, &mut sampler).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    for _ in 0..50 {
        let values: Vec<f64> = (0..ctx.degree() / 2)
            .map(|_| rng.gen_range(-1000.0..1000.0))
            .collect();
        let pt = ctx.ckks_encode(&values, ctx.default_scale()).unwrap();
        let ct = ctx.encrypt(&pk, &pt, &mut sampler).unwrap();
        let dec = ctx.ckks_decode(&ctx.decrypt(&sk, &ct).unwrap()).unwrap();
        for (got, want) in dec.iter().zip(&values) {
            assert!((got - want).abs() <= 1e-4, "{got} vs {want}");
        }
    }
}

#[test]
fn bfv_bgv_add_mul_match_slot_oracle() {
    for scheme in [Scheme::Bfv, Scheme::Bgv] {
        let ctx = small_ctx(scheme);
        let mut sampler = Sampler::from_seed([11u8; 32]);
        let (sk, pk, rk) = keygen(&ctx, &mut sampler).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let slots = ctx.slot_count().unwrap();
        for _ in 0..20 {
            let a = rand_slots(&mut rng, slots);
            let b = rand_slots(&mut rng, slots);
            let ca = ctx
                .encrypt(&pk, &ctx.encode_integers(&a).unwrap(), &mut sampler)
                .unwrap();
            let cb = ctx
                .encrypt(&pk, &ctx.encode_integers(&b).unwrap(), &mut sampler)
                .unwrap();

            let sum = ctx.decrypt(&sk, &ctx.add(&ca, &cb).unwrap()).unwrap();
            let sum = ctx.decode_integers(&sum).unwrap();
            let want_sum: Vec<u64> = a.iter().zip(&b).map(|(x, y)| (x + y) % T).collect();
            assert_eq!(sum, want_sum, "{scheme:?} add");

            let prod3 = ctx.multiply(&ca, &cb).unwrap();
            let prod = ctx.relinearize(&rk, &prod3).unwrap();
            let got = ctx.decode_integers(&ctx.decrypt(&sk, &prod).unwrap()).unwrap();
            let want: Vec<u64> = a
                .iter()
                .zip(&b)
                .map(|(x, y)| ((*x as u128 * *y as u128) % T as u128) as u64)
                .collect();
            assert_eq!(got, want, "{scheme:?} mul");

            // Relinearization only rewrites the ciphertext shape; the size-3
            // ciphertext decrypts to the same product.
            let ext = ctx
                .decode_integers(&ctx.decrypt_extended(&sk, &prod3).unwrap())
                .unwrap();
            assert_eq!(ext, want, "{scheme:?} extended decrypt");
        }
    }
}

#[test]
fn ckks_add_mul_match_plain_oracle() {
    let ctx = small_ctx(Scheme::Ckks);
    let mut sampler = Sampler::from_seed([12u8; 32]);
    let (sk, pk, rk) = keygen(&ctx, &mut sampler).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    let slots = ctx.degree() / 2;
    for _ in 0..20 {
        let a: Vec<f64> = (0..slots).map(|_| rng.gen_range(-100.0..100.0)).collect();
        let b: Vec<f64> = (0..slots).map(|_| rng.gen_range(-100.0..100.0)).collect();
        let s = ctx.default_scale();
        let ca = ctx.encrypt(&pk, &ctx.ckks_encode(&a, s).unwrap(), &mut sampler).unwrap();
        let cb = ctx.encrypt(&pk, &ctx.ckks_encode(&b, s).unwrap(), &mut sampler).unwrap();

        let sum = ctx.ckks_decode(&ctx.decrypt(&sk, &ctx.add(&ca, &cb).unwrap()).unwrap()).unwrap();
        for (j, z) in sum.iter().enumerate() {
            assert!((z - (a[j] + b[j])).abs() <= 1e-3, "add slot {j}");
        }

        let prod = ctx.relinearize(&rk, &ctx.multiply(&ca, &cb).unwrap()).unwrap();
        let prod = ctx.rescale(&prod).unwrap();
        let got = ctx.ckks_decode(&ctx.decrypt(&sk, &prod).unwrap()).unwrap();
        for (j, z) in got.iter().enumerate() {
            assert!((z - a[j] * b[j]).abs() <= 1e-3, "mul slot {j}: {z} vs {}", a[j] * b[j]);
        }
    }
}

#[test]
fn noise_budget_positive_and_decreasing() {
    for scheme in [Scheme::Bfv, Scheme::Bgv] {
        let ctx = small_ctx(scheme);
        let mut sampler = Sampler::from_seed([13u8; 32]);
        let (sk, pk, rk) = keygen(&ctx, &mut sampler).unwrap();
        let pt = ctx.encode_integers(&[1, 2, 3]).unwrap();
        let fresh = ctx.encrypt(&pk, &pt, &mut sampler).unwrap();
        let b0 = ctx.noise_budget(&sk, &fresh).unwrap();
        assert!(b0 > 30, "{scheme:?} fresh budget {b0}");
        let prod = ctx
            .relinearize(&rk, &ctx.multiply(&fresh, &fresh).unwrap())
            .unwrap();
        let b1 = ctx.noise_budget(&sk, &prod).unwrap();
        assert!(b1 > 0, "{scheme:?} post-multiply budget {b1}");
        assert!(b1 < b0, "{scheme:?} budget must drop: {b0} -> {b1}");
    }
}

#[test]
fn mod_switch_preserves_plaintext() {
    for scheme in [Scheme::Bfv, Scheme::Bgv] {
        let ctx = small_ctx(scheme);
        let mut sampler = Sampler::from_seed([14u8; 32]);
        let (sk, pk, _) = keygen(&ctx, &mut sampler).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        for _ in 0..20 {
            let values = rand_slots(&mut rng, ctx.slot_count().unwrap());
            let ct = ctx
                .encrypt(&pk, &ctx.encode_integers(&values).unwrap(), &mut sampler)
                .unwrap();
            let switched = ctx.mod_switch(&ct).unwrap();
            assert_eq!(switched.level, ct.level - 1);
            let got = ctx.decode_integers(&ctx.decrypt(&sk, &switched).unwrap()).unwrap();
            assert_eq!(got, values, "{scheme:?}");
        }
    }
}

#[test]
fn ckks_rescale_tracks_scale() {
    let ctx = small_ctx(Scheme::Ckks);
    let mut sampler = Sampler::from_seed([15u8; 32]);
    let (sk, pk, rk) = keygen(&ctx, &mut sampler).unwrap();
    let s = ctx.default_scale();
    let a = ctx.encrypt(&pk, &ctx.ckks_encode(&[2.0, -3.5], s).unwrap(), &mut sampler).unwrap();
    let prod = ctx.relinearize(&rk, &ctx.multiply(&a, &a).unwrap()).unwrap();
    assert!((prod.scale - s * s).abs() / (s * s) < 1e-12);
    let rescaled = ctx.rescale(&prod).unwrap();
    assert_eq!(rescaled.level, prod.level - 1);
    // New scale is s^2 / p for the dropped ~40-bit prime.
    assert!(rescaled.scale < s * 1.1 && rescaled.scale > s * 0.9);
    let got = ctx.ckks_decode(&ctx.decrypt(&sk, &rescaled).unwrap()).unwrap();
    assert!((got[0] - 4.0).abs() < 1e-3 && (got[1] - 12.25).abs() < 1e-3);
}

#[test]
fn ckks_drop_level_aligns_operands() {
    let ctx = small_ctx(Scheme::Ckks);
    let mut sampler = Sampler::from_seed([16u8; 32]);
    let (sk, pk, rk) = keygen(&ctx, &mut sampler).unwrap();
    let s = ctx.default_scale();
    let a = ctx.encrypt(&pk, &ctx.ckks_encode(&[5.0], s).unwrap(), &mut sampler).unwrap();
    let prod = ctx.rescale(&ctx.relinearize(&rk, &ctx.multiply(&a, &a).unwrap()).unwrap()).unwrap();
    // Bring a fresh ciphertext to the product's level and scale, then add.
    let b = ctx
        .encrypt(&pk, &ctx.ckks_encode(&[1.0], prod.scale).unwrap(), &mut sampler)
        .unwrap();
    let b = ctx.drop_level(&b, prod.level).unwrap();
    let sum = ctx.add(&prod, &b).unwrap();
    let got = ctx.ckks_decode(&ctx.decrypt(&sk, &sum).unwrap()).unwrap();
    assert!((got[0] - 26.0).abs() < 1e-3, "{}", got[0]);
}

#[test]
fn plain_operand_operations() {
    let ctx = small_ctx(Scheme::Bfv);
    let mut sampler = Sampler::from_seed([17u8; 32]);
    let (sk, pk, _) = keygen(&ctx, &mut sampler).unwrap();
    let a = vec![100u64; 4];
    let b = vec![7u64; 4];
    let ca = ctx.encrypt(&pk, &ctx.encode_integers(&a).unwrap(), &mut sampler).unwrap();
    let pb = ctx.encode_integers(&b).unwrap();
    let sum = ctx.decode_integers(&ctx.decrypt(&sk, &ctx.add_plain(&ca, &pb).unwrap()).unwrap()).unwrap();
    assert_eq!(&sum[..4], &[107, 107, 107, 107]);
    let prod = ctx.decode_integers(&ctx.decrypt(&sk, &ctx.mul_plain(&ca, &pb).unwrap()).unwrap()).unwrap();
    assert_eq!(&prod[..4], &[700, 700, 700, 700]);
}

#[test]
fn mismatches_are_rejected() {
    let bfv = small_ctx(Scheme::Bfv);
    let bgv = small_ctx(Scheme::Bgv);
    let mut sampler = Sampler::from_seed([18u8; 32]);
    let (_, pk, _) = keygen(&bfv, &mut sampler).unwrap();
    let pt = bgv.encode_integers(&[1]).unwrap();
    assert!(bfv.encrypt(&pk, &pt, &mut sampler).is_err());

    let ckks = small_ctx(Scheme::Ckks);
    let mut s2 = Sampler::from_seed([19u8; 32]);
    let (_, pk2, _) = keygen(&ckks, &mut s2).unwrap();
    let a = ckks
        .encrypt(&pk2, &ckks.ckks_encode(&[1.0], ckks.default_scale()).unwrap(), &mut s2)
        .unwrap();
    let b = ckks
        .encrypt(&pk2, &ckks.ckks_encode(&[1.0], ckks.default_scale() * 4.0).unwrap(), &mut s2)
        .unwrap();
    assert!(ckks.add(&a, &b).is_err()); // scale mismatch
    let dropped = ckks.drop_level(&a, a.level - 1).unwrap();
    assert!(ckks.add(&a, &dropped).is_err()); // level mismatch
}
