//! Per-slot performance model: SINR, bit error rate, energy, delay, and the
//! scalar utility combining them.

use super::config::{OffloadAction, OffloadConfig};
use crate::params::RewardWeights;

/// Signal-to-interference-plus-noise ratio (linear).
pub fn sinr(tx_mw: f64, gain: f64, noise_mw: f64, jam_mw: f64, jam_gain: f64) -> f64 {
    tx_mw * gain / (noise_mw + jam_mw * jam_gain)
}

/// Bit error rate of a noncoherent DPSK link: 0.5 * exp(-sinr / 2).
/// Strictly decreasing, in (0, 0.5].
pub fn bit_error_rate(sinr: f64) -> f64 {
    0.5 * (-sinr / 2.0).exp()
}

/// Linear utility over the slot's performance components.
pub fn utility(sinr: f64, ber: f64, energy_j: f64, delay_s: f64, w: &RewardWeights) -> f64 {
    w.w_sinr * (1.0 + sinr).log2() - w.w_ber * ber - w.w_energy * energy_j - w.w_delay * delay_s
}

/// Energy (J) and delay (s) of computing one task with offload fraction
/// `fraction` at the given link conditions.
///
/// The transmit rate is `bw * 1e6 * link_rate * log2(1 + sinr) / (1 + density)`
/// bits/s. If `fraction > 0` but the rate is zero, the transmission fails:
/// all bits are recomputed locally and a timeout of
/// `txfail_timeout_factor` times the full local compute time is added
/// before the failed share's recompute.
pub fn energy_and_delay(
    cfg: &OffloadConfig,
    fraction: f64,
    sinr: f64,
    bandwidth_mhz: f64,
    user_density: f64,
) -> (f64, f64) {
    let bits = cfg.task_bits as f64;
    let cycles = bits * cfg.cpu_cycles_per_bit as f64;
    let local_energy = cycles * cfg.energy_per_cycle_j;
    let local_delay = cycles / cfg.local_cpu_hz;
    if fraction == 0.0 {
        return (local_energy, local_delay);
    }
    let rate_bps =
        bandwidth_mhz * 1e6 * cfg.link_rate_bps_per_hz * (1.0 + sinr).log2() / (1.0 + user_density);
    if rate_bps <= 0.0 {
        // Failed transmission: the local share finishes inside the timeout
        // window, the offloaded share is recomputed afterwards.
        let energy = local_energy;
        let delay = cfg.txfail_timeout_factor * local_delay
            + fraction * cycles / cfg.local_cpu_hz;
        return (energy, delay);
    }
    let tx_time = fraction * bits / rate_bps;
    let energy = tx_time * (cfg.tx_power_mw / 1000.0) + (1.0 - fraction) * local_energy;
    let offload_path = tx_time + fraction * cycles / cfg.edge_cpu_hz;
    let local_path = (1.0 - fraction) * local_delay;
    (energy, offload_path.max(local_path))
}

/// Performance components of one slot plus the scalar utility.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RewardBreakdown {
    /// Linear SINR of the uplink; 0 when nothing was transmitted.
    pub sinr: f64,
    pub ber: f64,
    pub energy_j: f64,
    pub delay_s: f64,
    pub utility: f64,
}

/// One slot of experience; the replay unit.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition<S> {
    pub state: S,
    pub action: usize,
    pub reward: f64,
    pub next_state: S,
}

/// Deterministic slot outcome for an action under the given ground
/// conditions. `jam_received_mw` is the jam power arriving at the chosen
/// edge before fading; `jam_gain` is the fading on that jammer link.
pub(crate) fn compute_breakdown(
    cfg: &OffloadConfig,
    action: OffloadAction,
    device_gain: f64,
    jam_received_mw: f64,
    jam_gain: f64,
    bandwidth_mhz: f64,
    user_density: f64,
) -> RewardBreakdown {
    let fraction = action.fraction(cfg);
    let link_sinr = if fraction > 0.0 {
        sinr(cfg.tx_power_mw, device_gain, cfg.noise_mw, jam_received_mw, jam_gain)
    } else {
        0.0
    };
    let ber = bit_error_rate(link_sinr);
    let (energy_j, delay_s) = energy_and_delay(cfg, fraction, link_sinr, bandwidth_mhz, user_density);
    let utility = utility(link_sinr, ber, energy_j, delay_s, &cfg.weights);
    RewardBreakdown { sinr: link_sinr, ber, energy_j, delay_s, utility }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::RewardWeights;
    use proptest::prelude::*;

    const REL: f64 = 1e-12;

    fn assert_rel(actual: f64, expected: f64) {
        let err = (actual - expected).abs() / expected.abs().max(1.0);
        assert!(err <= REL, "actual {actual}, expected {expected}, rel err {err}");
    }

    #[test]
    fn sinr_examples() {
        assert_rel(sinr(100.0, 0.1, 1.0, 0.0, 1.0), 10.0);
        assert_rel(sinr(100.0, 0.1, 1.0, 9.0, 1.0), 1.0);
        assert_eq!(sinr(0.0, 0.3, 1.0, 5.0, 2.0), 0.0);
    }

    #[test]
    fn ber_examples() {
        assert_rel(bit_error_rate(0.0), 0.5);
        assert_rel(bit_error_rate(2.0), 0.5 * (-1.0f64).exp());
        assert!((bit_error_rate(2.0) - 0.18393972058572117).abs() < 1e-15);
    }

    #[test]
    fn utility_examples() {
        let w = RewardWeights { w_sinr: 1.0, w_ber: 0.0, w_energy: 1.0, w_delay: 1.0 };
        assert_rel(utility(3.0, 0.123, 0.5, 0.3, &w), 2.0 - 0.8);
        let w = RewardWeights { w_sinr: 0.0, w_ber: 1.0, w_energy: 0.0, w_delay: 0.0 };
        assert_rel(utility(0.0, bit_error_rate(0.0), 9.0, 9.0, &w), -0.5);
    }

    #[test]
    fn energy_delay_local_only() {
        let cfg = OffloadConfig::default();
        let (e, d) = energy_and_delay(&cfg, 0.0, 123.0, 4.0, 1.0);
        assert_rel(e, 500_000.0 * 1000.0 * 1e-9);
        assert_rel(d, 500_000.0 * 1000.0 / 1e9);
    }

    #[test]
    fn energy_delay_full_offload_plugin() {
        // fraction 1, sinr 1, 1 MHz, unit spectral efficiency, no sharing,
        // 1e6 bits, 100 mW, effectively instant edge CPU.
        let mut cfg = OffloadConfig::default();
        cfg.task_bits = 1_000_000;
        cfg.tx_power_mw = 100.0;
        cfg.edge_cpu_hz = 1e30;
        cfg.link_rate_bps_per_hz = 1.0;
        let (e, d) = energy_and_delay(&cfg, 1.0, 1.0, 1.0, 0.0);
        assert_rel(e, 0.1);
        assert_rel(d, 1.0);
    }

    #[test]
    fn energy_delay_failed_transmission() {
        let cfg = OffloadConfig::default();
        let local_e = cfg.local_compute_j();
        let local_d = cfg.local_compute_s();
        let (e, d) = energy_and_delay(&cfg, 1.0, 0.0, 4.0, 1.0);
        assert_rel(e, local_e);
        assert_rel(d, cfg.txfail_timeout_factor * local_d + local_d);
        // Partial offload still recomputes everything locally.
        let (e2, d2) = energy_and_delay(&cfg, 0.5, 0.0, 4.0, 1.0);
        assert_rel(e2, local_e);
        assert_rel(d2, cfg.txfail_timeout_factor * local_d + 0.5 * local_d);
    }

    proptest! {
        #[test]
        fn ber_strictly_decreasing(a in 0.0f64..50.0, b in 0.0f64..50.0) {
            prop_assume!(a != b);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(bit_error_rate(lo) > bit_error_rate(hi));
        }

        #[test]
        fn ber_in_half_open_range(s in 0.0f64..1400.0) {
            // exp(-s/2) underflows to zero beyond s ~ 1490; stay within
            // the representable tail.
            let b = bit_error_rate(s);
            prop_assert!(b > 0.0 && b <= 0.5);
        }

        #[test]
        fn sinr_non_increasing_in_jam_power(jam in 0.0f64..1e6, extra in 0.0f64..1e6) {
            let base = sinr(100.0, 0.2, 1.0, jam, 0.7);
            let more = sinr(100.0, 0.2, 1.0, jam + extra, 0.7);
            prop_assert!(more <= base);
        }

        #[test]
        fn utility_scales_linearly_with_weights(
            c in 0.01f64..100.0,
            s in 0.0f64..100.0,
            e in 0.0f64..10.0,
            d in 0.0f64..10.0,
        ) {
            let w = RewardWeights::default();
            let scaled = RewardWeights {
                w_sinr: w.w_sinr * c,
                w_ber: w.w_ber * c,
                w_energy: w.w_energy * c,
                w_delay: w.w_delay * c,
            };
            let ber = bit_error_rate(s);
            let u1 = utility(s, ber, e, d, &w);
            let u2 = utility(s, ber, e, d, &scaled);
            prop_assert!((u2 - c * u1).abs() <= 1e-9 * (1.0 + u2.abs().max((c * u1).abs())));
        }
    }
}
