use fkit::graphs::{enumerate_kontsevich, enumerate_shoikhet, EnumConfig};

fn tuples(n: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out.into_iter().flat_map(|t| (0..=3u32).map(move |v| { let mut t = t.clone(); t.push(v); t })).collect();
    }
    out
}

fn main() {
    let cfg = EnumConfig::default();
    let mut total = 0usize;
    let mut errs = 0usize;
    let t0 = std::time::Instant::now();
    for n in 0..=3u32 {
        for m in 0..=3u32 {
            for valences in tuples(n) {
                match enumerate_kontsevich(n, m, &valences, &cfg) {
                    Ok(g) => { if g.len() > 100_000 { println!("K n={n} m={m} val={valences:?}: {}", g.len()); } total += g.len(); }
                    Err(e) => { errs += 1; println!("K n={n} m={m} val={valences:?}: ERR {e}"); }
                }
                for sv in 0..=3u32 {
                    match enumerate_shoikhet(n, m, sv, &valences, &cfg) {
                        Ok(g) => { if g.len() > 100_000 { println!("S n={n} m={m} sv={sv} val={valences:?}: {}", g.len()); } total += g.len(); }
                        Err(e) => { if !format!("{e}").contains("m >= 1") { errs += 1; println!("S n={n} m={m} sv={sv} val={valences:?}: ERR {e}"); } }
                    }
                }
            }
        }
    }
    println!("total {total} graphs, {errs} hard errors, {:.2}s", t0.elapsed().as_secs_f64());
}
