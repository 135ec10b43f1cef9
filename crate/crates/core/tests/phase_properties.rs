use std::f64::consts::PI;

use proptest::prelude::*;

use bfmix::phases::{strong_coupling_phase, weak_coupling_phase, Admissibility, FieldPoint, PhaseLabel, SectorTable};

fn adm_strategy() -> impl Strategy<Value = Admissibility> {
    prop::sample::select(vec![Admissibility::All, Admissibility::YoungTableau])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn weak_phase_is_scale_invariant(
        n in 2usize..30, ratio in 0.0f64..8.0, h in -12.0f64..12.0, a in 0.3f64..3.0, adm in adm_strategy(),
    ) {
        // Free energies scale as 1/L², so do the fields.
        let l = n as f64;
        let f = FieldPoint::from_ratio(ratio, h, 1.0).unwrap();
        let g = FieldPoint::from_ratio(ratio, h / (a * a), 1.0 / (a * a)).unwrap();
        let p = weak_coupling_phase(&f, n, l, adm).unwrap();
        let q = weak_coupling_phase(&g, n, a * l, adm).unwrap();
        prop_assert_eq!(p.populations, q.populations);
    }

    #[test]
    fn field_reversal_swaps_spins(
        n in 2usize..30, ratio in 0.0f64..8.0, h in 0.01f64..12.0, adm in adm_strategy(), strong in any::<bool>(),
    ) {
        let l = n as f64;
        let f = FieldPoint::from_ratio(ratio, h, 1.0).unwrap();
        let phase = |f: &FieldPoint| if strong {
            strong_coupling_phase(f, n, l, adm)
        } else {
            weak_coupling_phase(f, n, l, adm)
        }.unwrap();
        let p = phase(&f);
        let q = phase(&f.mirrored());
        prop_assert_eq!(p.populations.up, q.populations.down);
        prop_assert_eq!(p.populations.down, q.populations.up);
        prop_assert_eq!(p.label.mirrored(), q.label);
    }

    #[test]
    fn magnetisation_grows_with_field(n in 2usize..30, ratio in 0.0f64..8.0, h in -12.0f64..12.0, dh in 0.0f64..3.0) {
        let l = n as f64;
        let m = |h: f64| {
            let p = weak_coupling_phase(&FieldPoint::from_ratio(ratio, h, 1.0).unwrap(), n, l, Admissibility::All).unwrap();
            p.populations.up as i64 - p.populations.down as i64
        };
        prop_assert!(m(h + dh) >= m(h));
    }

    #[test]
    fn tableau_admissibility_is_respected(n in 2usize..30, ratio in 0.0f64..8.0, h in -12.0f64..12.0) {
        let f = FieldPoint::from_ratio(ratio, h, 1.0).unwrap();
        for p in [
            weak_coupling_phase(&f, n, n as f64, Admissibility::YoungTableau).unwrap(),
            strong_coupling_phase(&f, n, n as f64, Admissibility::YoungTableau).unwrap(),
        ] {
            let pop = p.populations;
            prop_assert!(pop.bosons >= pop.up.max(pop.down));
            prop_assert_eq!(pop.total(), n);
        }
    }

    #[test]
    fn minimiser_beats_every_population(n in 2usize..12, ratio in 0.0f64..8.0, h in -12.0f64..12.0) {
        let l = n as f64;
        let f = FieldPoint::from_ratio(ratio, h, (2.0 * PI / l).powi(2)).unwrap();
        let best = weak_coupling_phase(&f, n, l, Admissibility::All).unwrap();
        for up in 0..=n {
            for down in 0..=n - up {
                let p = bfmix::bae::Populations { bosons: n - up - down, up, down };
                let g = bfmix::phases::grand_energy(&p, bfmix::phases::free_energy(&p, l), &f);
                prop_assert!(best.grand_energy <= g + 1e-12 * (1.0 + g.abs()));
            }
        }
    }
}

#[test]
fn strong_regime_is_decided_by_chemical_potentials() {
    let (n, l) = (10, 10.0);
    let at = |ratio: f64, h: f64| {
        strong_coupling_phase(
            &FieldPoint::from_ratio(ratio, h, 1.0).unwrap(),
            n,
            l,
            Admissibility::All,
        )
        .unwrap()
        .label
    };
    assert_eq!(at(0.5, 0.0), PhaseLabel::B);
    assert_eq!(at(2.0, 0.5), PhaseLabel::F1);
    assert_eq!(at(2.0, -0.5), PhaseLabel::F2);
}

#[test]
fn small_sector_table_covers_tableau_sectors() {
    let table = SectorTable::build(6, 6.0, 2.0).unwrap();
    assert!(table.failures().is_empty());
    for &((m, mp), e) in &table.energies {
        let (bosons, up, down) = (6 - m, m - mp, mp);
        assert!(bosons >= up && up >= down, "({m},{mp})");
        assert!(e.unwrap() > 0.0);
    }
    let f = FieldPoint::from_ratio(0.0, 0.0, 2.0).unwrap();
    assert_eq!(table.phase(&f).unwrap().label, PhaseLabel::B);
}
