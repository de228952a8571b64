//! Router success compared against exhaustive disjoint-path search on tiny fabrics.

mod common;

use common::routing::compare_on_random_instances;

#[test]
fn router_agrees_with_exhaustive_search() {
    let (agree, feasible, bad) = compare_on_random_instances(30, 0x5eed);
    assert!(bad.is_empty(), "{bad:#?}");
    assert_eq!(agree, 30);
    // the generator should produce both outcomes
    assert!(feasible > 0 && feasible < 30, "feasible = {feasible}");
}
