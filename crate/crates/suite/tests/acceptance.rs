use hubline_suite::criteria;

#[test]
fn acceptance() {
    let mut failed = Vec::new();
    for (i, criterion) in criteria().iter().enumerate() {
        let outcome = (criterion.check)();
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        println!("criterion {} [{tag}] {}: {}", i + 1, criterion.name, outcome.detail);
        if !outcome.pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
