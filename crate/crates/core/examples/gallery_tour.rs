//! Runs every gallery case against its expected verdicts.

fn main() -> Result<(), rankone::Error> {
    for c in rankone::gallery::list() {
        let r = rankone::gallery::run_expected(&c.name, None)?;
        println!("{:<48} depth {}  {} checks  {} mismatches", c.name, r.depth, r.results.len(), r.mismatches);
        for x in r.results.iter().filter(|x| x.expected != x.actual) {
            println!("  {:?}: expected {}, got {}", x.check, x.expected, x.actual);
        }
    }
    Ok(())
}
