mod common;

use gon::graph::isomorphic;
use gon::normalize::{classify_free, normalize_to_hatrack, NormalizeOptions};

#[test]
fn random_generators_normalize() {
    let mut r = common::rng(7);
    let opts = NormalizeOptions::default();
    for i in 0..120 {
        let n = if i % 2 == 0 { 3 } else { 4 };
        let g = common::random_open_nondegenerate(n, 16, &mut r);
        let out = normalize_to_hatrack(&g, &opts).unwrap_or_else(|e| panic!("case {i}: {e}\n{g:?}"));
        assert_eq!(out.hat_rack.delta(), common::delta_of(&g), "case {i}");
        out.certificate.verify().unwrap_or_else(|e| panic!("case {i}: {e}"));
        let again = normalize_to_hatrack(&out.graph, &opts).unwrap();
        assert!(again.certificate.is_identity(), "case {i}");
        assert!(isomorphic(&again.graph, &out.graph).is_some());
        assert_eq!(classify_free(&g, 1_000_000).unwrap(), classify_free(&out.graph, 1_000_000).unwrap());
    }
}
