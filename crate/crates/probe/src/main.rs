use fibcalc_core::*;

fn all_kinds(h: i64) -> Vec<KodairaKind> {
    if h == 0 { return vec![KodairaKind::RuledLine]; }
    vec![
        KodairaKind::Smooth, KodairaKind::I(1), KodairaKind::I(2), KodairaKind::I(3),
        KodairaKind::II, KodairaKind::III, KodairaKind::IV,
        KodairaKind::IStar(0), KodairaKind::IStar(1), KodairaKind::IIStar,
        KodairaKind::IIIStar, KodairaKind::IVStar,
    ]
}

fn run(g: i64, h: i64, n: i64, max_nodes: usize, extra: i64) {
    let p = compute_params(g, h, n).unwrap();
    let caps = EnumCaps { max_nodes, max_mult: 3*n+1, alpha0_extra: extra, max_germs: 2_000_000, ..Default::default() };
    let t0 = std::time::Instant::now();
    let germs = enumerate_germs(&p, &all_kinds(h), &caps).unwrap();
    println!("(g={g},h={h},n={n}) nodes<={max_nodes}: {} germs, enum {:?}", germs.len(), t0.elapsed());
}

fn main() {
    run(3, 1, 2, 3, 1);
    run(7, 1, 3, 4, 0);
}
