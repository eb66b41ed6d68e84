//! Closed-form delivery probabilities for an H-hop relay chain, and the
//! Monte Carlo models that validate them.
//!
//! The abstract chain: a packet must survive `hops` transmissions in a
//! row. Around every intermediate relay sit `candidates` nodes, each
//! hearing any one transmission independently with probability `p`. A
//! coded frame only helps a node that can open it, which takes `pieces`
//! independent receptions — the frame itself plus the partner traffic
//! needed to peel it.
//!
//! Three forwarding styles fall out of that picture:
//!
//! * plain cooperative: any of the candidates may carry the packet on, for
//!   every stage but the last plain reception —
//!   `(1-(1-p)^N)^(H-1) * p`;
//! * coded, fixed path: after a cooperative first stage, every later stage
//!   stands or falls with one designated forwarder capturing all `m`
//!   pieces — `(1-(1-p)^N) * (p^m)^(H-1)`;
//! * coded, cooperative: at the middle stages any of the `N` candidates
//!   that captured all `m` pieces can take over, and only the final stage
//!   is pinned — `(1-(1-p)^N) * (1-(1-p^m)^N)^(H-2) * p^m`.
//!
//! The Monte Carlo estimators below replay exactly these stories with
//! per-candidate, per-piece coin flips, so they validate the formulas'
//! structure rather than re-evaluating them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Probability that at least one of `candidates` independent listeners
/// hears a transmission that each hears with probability `p`.
pub fn forwarding_success(p: f64, candidates: u32) -> f64 {
    1.0 - (1.0 - p).powi(candidates as i32)
}

/// Plain cooperative forwarding across a chain of `hops` transmissions
/// (`hops >= 1`): every stage but the last may be carried by any of the
/// `candidates`, the last must reach the destination itself.
pub fn native_delivery(p: f64, candidates: u32, hops: u32) -> f64 {
    forwarding_success(p, candidates).powi(hops as i32 - 1) * p
}

/// Coded forwarding without cooperation (`hops >= 2`): one cooperative
/// first stage, then every stage needs its designated forwarder to capture
/// all `pieces`.
pub fn bend_delivery(p: f64, candidates: u32, hops: u32, pieces: u32) -> f64 {
    forwarding_success(p, candidates) * p.powi(pieces as i32).powi(hops as i32 - 1)
}

/// Coded forwarding with cooperation (`hops >= 2`): as above, but at the
/// middle stages any candidate that captured all `pieces` may take over.
pub fn flexonc_delivery(p: f64, candidates: u32, hops: u32, pieces: u32) -> f64 {
    let q = p.powi(pieces as i32);
    forwarding_success(p, candidates)
        * forwarding_success(q, candidates).powi(hops as i32 - 2)
        * q
}

/// One row of a delivery-probability table.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ChainAnalysis {
    pub p: f64,
    pub candidates: u32,
    pub hops: u32,
    pub pieces: u32,
    pub native: f64,
    pub bend: f64,
    pub flexonc: f64,
    /// flexonc minus bend: what cooperation buys coded traffic.
    pub gap: f64,
}

pub fn analyze_chain(ps: &[f64], candidates: u32, hops: u32, pieces: u32) -> Vec<ChainAnalysis> {
    ps.iter()
        .map(|&p| {
            let bend = bend_delivery(p, candidates, hops, pieces);
            let flexonc = flexonc_delivery(p, candidates, hops, pieces);
            ChainAnalysis {
                p,
                candidates,
                hops,
                pieces,
                native: native_delivery(p, candidates, hops),
                bend,
                flexonc,
                gap: flexonc - bend,
            }
        })
        .collect()
}

/// Fraction of `trials` in which `trial` succeeds, batched across threads.
/// The outcome depends only on `seed` and `trials`, never on scheduling.
fn mc_fraction<F>(trials: u64, seed: u64, trial: F) -> f64
where
    F: Fn(&mut ChaCha8Rng) -> bool + Sync,
{
    const BATCHES: u64 = 64;
    let per = trials / BATCHES;
    let extra = trials % BATCHES;
    let successes: u64 = (0..BATCHES)
        .into_par_iter()
        .map(|b| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(seed ^ (b + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let n = per + u64::from(b < extra);
            (0..n).filter(|_| trial(&mut rng)).count() as u64
        })
        .sum();
    successes as f64 / trials as f64
}

fn any_candidate_hears(rng: &mut ChaCha8Rng, p: f64, candidates: u32) -> bool {
    (0..candidates).any(|_| rng.gen::<f64>() < p)
}

fn captures_all_pieces(rng: &mut ChaCha8Rng, p: f64, pieces: u32) -> bool {
    (0..pieces).all(|_| rng.gen::<f64>() < p)
}

fn any_candidate_captures(rng: &mut ChaCha8Rng, p: f64, candidates: u32, pieces: u32) -> bool {
    (0..candidates).any(|_| captures_all_pieces(rng, p, pieces))
}

/// Monte Carlo counterpart of [`native_delivery`].
pub fn mc_native(p: f64, candidates: u32, hops: u32, trials: u64, seed: u64) -> f64 {
    mc_fraction(trials, seed, |rng| {
        (1..hops).all(|_| any_candidate_hears(rng, p, candidates)) && rng.gen::<f64>() < p
    })
}

/// Monte Carlo counterpart of [`bend_delivery`].
pub fn mc_bend(p: f64, candidates: u32, hops: u32, pieces: u32, trials: u64, seed: u64) -> f64 {
    mc_fraction(trials, seed, |rng| {
        any_candidate_hears(rng, p, candidates)
            && (1..hops).all(|_| captures_all_pieces(rng, p, pieces))
    })
}

/// Monte Carlo counterpart of [`flexonc_delivery`].
pub fn mc_flexonc(p: f64, candidates: u32, hops: u32, pieces: u32, trials: u64, seed: u64) -> f64 {
    mc_fraction(trials, seed, |rng| {
        any_candidate_hears(rng, p, candidates)
            && (2..hops).all(|_| any_candidate_captures(rng, p, candidates, pieces))
            && captures_all_pieces(rng, p, pieces)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_point_at_ninety_percent() {
        // p = 0.9, two candidates, three hops, two pieces — worked by hand:
        // native 0.99^2 * 0.9, coded fixed 0.99 * 0.81^2, coded
        // cooperative 0.99 * (1 - 0.19^2) * 0.81.
        assert!((native_delivery(0.9, 2, 3) - 0.882090).abs() < 1e-6);
        assert!((bend_delivery(0.9, 2, 3, 2) - 0.649539).abs() < 1e-6);
        assert!((flexonc_delivery(0.9, 2, 3, 2) - 0.7729514).abs() < 1e-6);
        let rows = analyze_chain(&[0.9], 2, 3, 2);
        assert!((rows[0].gap - 0.1234124).abs() < 1e-6);
    }

    #[test]
    fn edge_probabilities_collapse_correctly() {
        for f in [
            native_delivery(1.0, 2, 4),
            bend_delivery(1.0, 2, 4, 2),
            flexonc_delivery(1.0, 2, 4, 2),
        ] {
            assert_eq!(f, 1.0);
        }
        for f in [
            native_delivery(0.0, 2, 4),
            bend_delivery(0.0, 2, 4, 2),
            flexonc_delivery(0.0, 2, 4, 2),
        ] {
            assert_eq!(f, 0.0);
        }
    }

    #[test]
    fn single_candidate_removes_the_cooperation_advantage() {
        // With one candidate per stage the cooperative coded chain IS the
        // fixed-path coded chain, and plain forwarding is p^H.
        for &p in &[0.3, 0.6, 0.9] {
            for hops in 2..6 {
                assert!((native_delivery(p, 1, hops) - p.powi(hops as i32)).abs() < 1e-12);
                for pieces in 2..4 {
                    let b = bend_delivery(p, 1, hops, pieces);
                    let f = flexonc_delivery(p, 1, hops, pieces);
                    assert!((b - f).abs() < 1e-12, "p={p} hops={hops} pieces={pieces}");
                }
            }
        }
    }

    #[test]
    fn cooperation_strictly_helps_coded_traffic() {
        for &p in &[0.05, 0.2, 0.35, 0.5, 0.65, 0.8, 0.9, 0.95, 0.99] {
            for candidates in 2..=4 {
                for hops in 3..=6 {
                    for pieces in 2..=4 {
                        let b = bend_delivery(p, candidates, hops, pieces);
                        let f = flexonc_delivery(p, candidates, hops, pieces);
                        assert!(
                            f > b,
                            "p={p} candidates={candidates} hops={hops} pieces={pieces}: {f} <= {b}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn the_advantage_fades_as_links_approach_perfection() {
        let gaps: Vec<f64> = analyze_chain(&[0.9, 0.95, 0.99], 2, 3, 2)
            .iter()
            .map(|r| r.gap)
            .collect();
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
        assert!(gaps[2] > 0.0);
    }

    #[test]
    fn monte_carlo_agrees_at_a_spot_check() {
        let trials = 200_000;
        let est = mc_native(0.8, 2, 4, trials, 11);
        assert!((est - native_delivery(0.8, 2, 4)).abs() < 0.01);
        let est = mc_bend(0.9, 2, 3, 2, trials, 12);
        assert!((est - bend_delivery(0.9, 2, 3, 2)).abs() < 0.01);
        let est = mc_flexonc(0.9, 2, 3, 2, trials, 13);
        assert!((est - flexonc_delivery(0.9, 2, 3, 2)).abs() < 0.01);
    }

    #[test]
    fn monte_carlo_is_reproducible() {
        let a = mc_flexonc(0.7, 3, 4, 2, 100_000, 99);
        let b = mc_flexonc(0.7, 3, 4, 2, 100_000, 99);
        assert_eq!(a, b);
        let c = mc_flexonc(0.7, 3, 4, 2, 100_000, 100);
        assert_ne!(a, c);
    }
}
