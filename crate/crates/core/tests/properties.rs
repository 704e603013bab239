use hdivflow_core::forms::{sigma, FluxParams};
use hdivflow_core::math::{self, Tensor2};
use hdivflow_core::mesh::{Rectangle, StructuredMesh};
use hdivflow_core::sparse::{SparseLu, Triplets};
use hdivflow_core::VelocitySpace;
use proptest::prelude::*;

fn tensor() -> impl Strategy<Value = Tensor2> {
    prop::array::uniform4(-3.0f64..3.0).prop_map(|a| [[a[0], a[1]], [a[2], a[3]]])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flux_is_monotone(a in tensor(), b in tensor(), r in 1.2f64..3.5) {
        let p = FluxParams::new(1.0, r).unwrap();
        let (sa, sb) = (sigma(&a, &p), sigma(&b, &p));
        let d = math::tensor_sub(&a, &b);
        let val = math::frobenius(&math::tensor_sub(&sa, &sb), &d);
        prop_assert!(val >= -1e-12 * (1.0 + math::tensor_norm(&d)));
    }

    #[test]
    fn flux_is_homogeneous(a in tensor(), r in 1.2f64..3.5, s in 0.1f64..4.0) {
        let p = FluxParams::with_regularization(0.7, r, 0.0).unwrap();
        let lhs = sigma(&math::tensor_scale(s, &a), &p);
        let rhs = math::tensor_scale(s.powf(r - 1.0), &sigma(&a, &p));
        let scale = math::tensor_norm(&rhs).max(1e-300);
        prop_assert!(math::tensor_norm(&math::tensor_sub(&lhs, &rhs)) <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn jittered_meshes_stay_conforming(n in 1usize..7, jitter in 0.0f64..0.3, seed in any::<u64>()) {
        let m = StructuredMesh::new(n, Rectangle::UNIT_SQUARE).jitter(jitter, seed).build().unwrap();
        prop_assert!((m.total_area() - 1.0).abs() < 1e-12);
        prop_assert_eq!(m.num_elements(), 2 * n * n);
        prop_assert_eq!(m.num_vertices() + m.num_elements(), m.num_faces() + 1);
        for t in 0..m.num_elements() {
            prop_assert!(m.area(t) > 0.0);
        }
        for f in 0..m.num_faces() {
            let face = m.face(f);
            prop_assert!((math::norm(face.normal) - 1.0).abs() < 1e-14);
            let toward = math::sub(m.face_midpoint(f), m.centroid(face.first));
            prop_assert!(math::dot(toward, face.normal) > 0.0);
        }
    }

    #[test]
    fn discrete_curl_is_solenoidal(n in 1usize..6, seed in any::<u64>()) {
        let m = StructuredMesh::new(n, Rectangle::UNIT_SQUARE).jitter(0.2, seed).build().unwrap();
        let space = VelocitySpace::new(&m).unwrap();
        let psi: Vec<f64> = (0..m.num_vertices()).map(|i| math::sin(1.3 * i as f64 + seed as f64 * 1e-9)).collect();
        let z = space.discrete_curl(&psi);
        prop_assert!(space.max_divergence(&z) < 1e-11);
    }

    #[test]
    fn sparse_lu_solves_diagonally_dominant_systems(
        entries in prop::collection::vec((0usize..30, 0usize..30, -1.0f64..1.0), 0..120),
        rhs in prop::collection::vec(-5.0f64..5.0, 30),
    ) {
        let mut t = Triplets::new(30, 30);
        for i in 0..30 {
            t.push(i, i, 40.0);
        }
        for (i, j, v) in entries {
            t.push(i, j, v);
        }
        let a = t.build();
        let x = SparseLu::new(&a).unwrap().solve(&rhs);
        let ax = a.mul_vec(&x);
        for (l, r) in ax.iter().zip(&rhs) {
            prop_assert!((l - r).abs() < 1e-12);
        }
    }
}
