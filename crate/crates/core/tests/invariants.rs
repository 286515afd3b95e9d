use metagrav::config::RawConfig;
use metagrav::experiments::{branch_envelope, BranchPair, ScenarioRegistry};
use metagrav::grid::{gaussian_packet, product_state, symmetrize, Grid, MetaWavefunction, C64};
use metagrav::reduced_state::{partial_trace_red, Interval};
use metagrav::sphere_potential::SpherePairPotential;
use proptest::prelude::*;

fn grid() -> Grid {
    Grid::new(2, 64, 24.0).unwrap()
}

fn two_branch(c1: f64, c2: f64, w: f64, phase: f64) -> MetaWavefunction {
    let g = grid();
    let a = gaussian_packet(&g, c1, w, 0.0).unwrap();
    let b = gaussian_packet(&g, c2, w, 0.0).unwrap();
    let first = product_state(g, &[a.clone(), a], vec![1.0; 2]).unwrap();
    let second = product_state(g, &[b.clone(), b], vec![1.0; 2]).unwrap();
    let z = C64::from_polar(1.0, phase);
    let amps = first.amplitudes().iter().zip(second.amplitudes()).map(|(p, q)| p + z * q).collect();
    let mut psi = MetaWavefunction::from_amplitudes(g, amps, vec![1.0; 2]).unwrap();
    psi.normalize().unwrap();
    psi
}

fn branch_pair(c: f64, w: f64, twist: f64) -> BranchPair {
    let g = Grid::new(2, 64, 32.0).unwrap();
    let s = gaussian_packet(&g, c, w, 0.0).unwrap();
    let pi = s.iter().flat_map(|a| s.iter().map(move |b| a * b * C64::from_polar(1.0, twist))).collect();
    BranchPair { points: 64, spacing: g.spacing(), interpenetrating: pi, separated: s }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sphere_energy_is_continuous_and_monotone(m in 0.1f64..10.0, r in 0.1f64..10.0, a in 0.0f64..5.0, b in 0.0f64..5.0) {
        let p = SpherePairPotential::new(m, r, 1.0).unwrap();
        let unit = p.energy_unit();
        prop_assert!((p.mutual_energy(0.0).unwrap() / unit + 1.2).abs() < 1e-14);
        let inner = p.mutual_energy(2.0 * r * (1.0 - 1e-12)).unwrap();
        let outer = p.mutual_energy(2.0 * r).unwrap();
        prop_assert!(((inner - outer) / unit).abs() < 1e-10);
        let (lo, hi) = (a.min(b) * r, a.max(b) * r);
        prop_assert!(p.mutual_energy(lo).unwrap() <= p.mutual_energy(hi).unwrap() + 1e-15 * unit);
        prop_assert!(p.force(hi).unwrap() <= 0.0);
    }

    #[test]
    fn reduced_state_is_a_density_matrix(c1 in -4.0f64..-1.0, c2 in 1.0f64..4.0, w in 1.1f64..1.6, phase in 0.0f64..6.3) {
        let rho = partial_trace_red(&two_branch(c1, c2, w, phase)).unwrap();
        prop_assert!((rho.trace() - 1.0).abs() < 1e-10);
        prop_assert!(rho.hermiticity_error() < 1e-12);
        let purity = rho.purity();
        prop_assert!(purity > 0.0 && purity <= 1.0 + 1e-10);
        prop_assert!(rho.is_positive_semidefinite(1e-10));
        let v = rho.coherence_visibility(&Interval::new(-12.0, 0.0).unwrap(), &Interval::new(0.0, 12.0).unwrap()).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
    }

    #[test]
    fn symmetrized_states_are_exchange_even(c1 in -4.0f64..4.0, c2 in -4.0f64..4.0, w in 1.1f64..1.6) {
        let g = grid();
        let a = gaussian_packet(&g, c1, w, 0.3).unwrap();
        let b = gaussian_packet(&g, c2, w, -0.2).unwrap();
        prop_assume!((c1 - c2).abs() > 0.5);
        let s = symmetrize(&product_state(g, &[a, b], vec![1.0; 2]).unwrap()).unwrap();
        prop_assert!(s.exchange_asymmetry() < 1e-12);
        prop_assert!((s.norm() - 1.0).abs() < 1e-12);
        prop_assert!(symmetrize(&s).unwrap().distance(&s) < 1e-12);
    }

    #[test]
    fn product_branches_have_unit_envelope(c in -3.0f64..3.0, w in 1.0f64..2.0, twist in 0.0f64..6.3) {
        let d = branch_envelope(&branch_pair(c, w, 0.0)).unwrap();
        prop_assert!((d - 1.0).abs() < 1e-12);
        let twisted = branch_envelope(&branch_pair(c, w, twist)).unwrap();
        prop_assert!(twisted <= 1.0 + 1e-12);
    }

    #[test]
    fn printed_configs_round_trip(radius in 1e3f64..1e6, points in prop::sample::select(vec![64usize, 128, 256])) {
        let registry = ScenarioRegistry::standard();
        let mut raw = RawConfig::default();
        raw.set(&format!("radius={radius}")).unwrap();
        raw.set(&format!("points={points}")).unwrap();
        let text = registry.configure("spread", &raw).unwrap().to_text();
        let again = registry.configure("spread", &RawConfig::parse(&text).unwrap()).unwrap().to_text();
        prop_assert_eq!(text, again);
    }
}
