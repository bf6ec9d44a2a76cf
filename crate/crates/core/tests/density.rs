use threecubes::driver::files::parse_solutions;
use threecubes::report::density_report;

#[test]
fn large_solutions_split_across_decades_14_and_15() {
    let (ok, bad) = parse_solutions(include_str!("data/large_solutions.txt"));
    assert!(bad.is_empty());
    let corpus: Vec<_> = ok.into_iter().map(|(_, s)| s).collect();
    let r = density_report(&corpus, 1000);
    assert_eq!(r.total, 14);
    assert_eq!(r.decade_counts.get(&14), Some(&12));
    assert_eq!(r.decade_counts.get(&15), Some(&2));
    assert_eq!(r.per_k[&327], 2);
    let cum = r.cumulative();
    assert_eq!(cum.len(), 16);
    assert_eq!(cum[13].1, 0);
    assert_eq!(cum[14], (10u128.pow(15), 12));
    assert_eq!(cum[15], (10u128.pow(16), 14));
    // every one of them is sporadic
    assert_eq!(r.sporadic_decade_counts, r.decade_counts);
}
