mod common;

use common::*;
use proptest::prelude::*;
use spfem::assembly::assemble;
use spfem::diagnostics::surface_energy;
use spfem::dofs::DofMap;
use spfem::geometry::{
    contact_area_change_lemma, contact_area_change_oracle, region_volumes, volume_change_lemma, weighted_normal,
};
use spfem::scenarios::{make_double_bubble_2d, make_drop_on_substrate, make_standard_bubble_2d};
use spfem::{validate, Point};

fn config() -> ProptestConfig {
    ProptestConfig { cases: 48, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn lemma_holds_for_any_admissible_motion(seed in any::<u64>(), amp in 1e-4f64..0.1, which in 0usize..3) {
        let c = match which {
            0 => octahedron(),
            1 => polygon(9, 1.3),
            _ => make_double_bubble_2d(33).unwrap(),
        };
        let f = Field::random(&mut rng(seed), c.dim);
        let old = c.positions();
        let new = perturbed(&c, &f, amp);
        let (v0, v1) = (region_volumes(&c, &old).unwrap(), region_volumes(&c, &new).unwrap());
        for l in 0..c.regions.len() {
            let lemma = volume_change_lemma(&c, &old, &new, l);
            prop_assert!((lemma - (v1[l] - v0[l])).abs() <= 1e-12 * v0[l].abs());
        }
    }

    #[test]
    fn contact_lemma_holds_for_in_plane_motion(seed in any::<u64>(), amp in 1e-4f64..0.1, d in 2usize..4) {
        let c = make_drop_on_substrate(d, if d == 2 { 33 } else { 150 }, 0.0).unwrap();
        let f = Field::random(&mut rng(seed), d);
        let old = c.positions();
        let mut new = perturbed(&c, &f, amp);
        for b in &c.boundaries {
            for &v in &b.chain {
                new[0][v].z = 0.0;
                if d == 2 {
                    new[0][v].y = 0.0;
                }
            }
        }
        for k in 0..c.boundaries.len() {
            let (_, lm) = contact_area_change_lemma(&c, &old, &new, k).unwrap();
            let (_, om) = contact_area_change_oracle(&c, &old, &new, k).unwrap();
            prop_assert!((lm - om).abs() <= 1e-12 * om.abs().max(1e-3));
        }
    }

    #[test]
    fn weighted_normal_is_the_old_normal_for_static_simplices(v in prop::array::uniform9(-1.0f64..1.0)) {
        let q = [Point::new(v[0], v[1], v[2]), Point::new(v[3], v[4], v[5]), Point::new(v[6], v[7], v[8])];
        let a = (q[1] - q[0]).cross(&(q[2] - q[0]));
        prop_assume!(a.norm() > 1e-3);
        let n = weighted_normal(&q, &q).unwrap();
        prop_assert!((n - a.normalize()).norm() < 1e-13);
    }

    #[test]
    fn assembled_matrix_is_symmetric(seed in any::<u64>(), amp in 0.0f64..0.02, aniso in any::<bool>()) {
        let mut c = make_standard_bubble_2d(3, 45).unwrap();
        if aniso {
            c.energy_model = spfem::EnergyModel::Anisotropic(spfem::Anisotropy::cusp(2, 1.0, 0.3).unwrap());
        }
        let dofs = DofMap::new(&c).unwrap();
        let lagged = perturbed(&c, &Field::random(&mut rng(seed), 2), amp);
        let m = assemble(&c, &dofs, &lagged, 1e-2).unwrap().full_matrix().to_dense();
        let asym = (&m - m.transpose()).abs().max();
        prop_assert!(asym <= 1e-13 * m.abs().max(), "{}", asym);
    }

    #[test]
    fn energy_ignores_element_order(seed in any::<u64>()) {
        let c = make_double_bubble_2d(33).unwrap();
        let mut shuffled = c.clone();
        let mut r = rng(seed);
        for p in &mut shuffled.patches {
            use rand::seq::SliceRandom;
            p.simplices.shuffle(&mut r);
        }
        let (a, b) = (surface_energy(&c, &c.positions()), surface_energy(&shuffled, &shuffled.positions()));
        prop_assert!((a - b).abs() <= 1e-13 * a);
    }

    #[test]
    fn planar_generators_validate(n in 2usize..8, k in 200usize..1200) {
        let c = make_standard_bubble_2d(n, k).unwrap();
        let rep = validate(&c);
        prop_assert!(rep.is_ok(), "{}", rep);
        prop_assert_eq!(c.num_vertices(), k);
    }
}
