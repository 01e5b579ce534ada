//! Acceptance run: one PASS/FAIL line per criterion.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use delta_simplex::atlas::{build_atlas, AtlasRecord, EnumerateOptions, FamilySelection};
use delta_simplex::corner::{
    corner_minimum, corner_minimum_bruteforce, reduce_residue, CornerSolver, GroupTable,
};
use delta_simplex::enumeration::enumerate_paral;
use delta_simplex::equivalence::{brute_force_equivalent, check_equivalence, Verdict};
use delta_simplex::linalg::{adjugate, det, dot, is_hnf, solve_rational};
use delta_simplex::normal_form::{paral_coordinates, primitivize, reduce_rhs, same_facets};
use delta_simplex::simplex::{apply_map, count_integer_points_bruteforce, validate_simplex};
use delta_simplex::{AffineUnimodularMap, Family, InequalitySystem, IntMatrix, IntVector};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn atlas(delta: u64, n: usize, up_to: bool) -> Vec<AtlasRecord> {
    build_atlas(&EnumerateOptions {
        delta,
        n,
        family: FamilySelection::Both,
        up_to,
    })
    .unwrap()
}

fn count(records: &[AtlasRecord], family: Family) -> usize {
    records.iter().filter(|r| r.family == family).count()
}

/// Lower-triangular HNF with `det <= max_det`.
fn random_hnf(rng: &mut ChaCha8Rng, n: usize, max_det: i64) -> IntMatrix {
    loop {
        let diag: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=max_det)).collect();
        if diag.iter().product::<i64>() > max_det {
            continue;
        }
        let mut hm = IntMatrix::zeros(n, n);
        for i in 0..n {
            hm.set(i, i, BigInt::from(diag[i]));
            for j in 0..i {
                hm.set(i, j, BigInt::from(rng.gen_range(0..diag[i])));
            }
        }
        assert!(is_hnf(&hm));
        return hm;
    }
}

/// Unimodular matrix with entries in `[-bound, bound]` from elementary row operations.
fn random_unimodular(rng: &mut ChaCha8Rng, n: usize, bound: i64) -> IntMatrix {
    let mut u = IntMatrix::identity(n);
    for _ in 0..rng.gen_range(0..=3 * n) {
        let mut next = u.clone();
        match rng.gen_range(0..3) {
            0 if n > 1 => {
                let i = rng.gen_range(0..n);
                let j = (i + rng.gen_range(1..n)) % n;
                let f = BigInt::from(if rng.gen() { 1 } else { -1 });
                for col in 0..n {
                    let v = next.get(i, col) + &f * u.get(j, col);
                    next.set(i, col, v);
                }
            }
            1 if n > 1 => {
                let i = rng.gen_range(0..n);
                let j = (i + rng.gen_range(1..n)) % n;
                for col in 0..n {
                    next.set(i, col, u.get(j, col).clone());
                    next.set(j, col, u.get(i, col).clone());
                }
            }
            _ => {
                let i = rng.gen_range(0..n);
                for col in 0..n {
                    next.set(i, col, -u.get(i, col));
                }
            }
        }
        if next.max_abs() <= BigInt::from(bound) {
            u = next;
        }
    }
    u
}

fn random_map(rng: &mut ChaCha8Rng, n: usize, u_bound: i64, x_bound: i64) -> AffineUnimodularMap {
    let u = random_unimodular(rng, n, u_bound);
    let x0 = (0..n)
        .map(|_| BigInt::from(rng.gen_range(-x_bound..=x_bound)))
        .collect();
    AffineUnimodularMap::new(u, x0).unwrap()
}

fn random_simplex(rng: &mut ChaCha8Rng, n: usize, bound: i64) -> InequalitySystem {
    loop {
        let a: Vec<Vec<i64>> = (0..=n)
            .map(|_| (0..n).map(|_| rng.gen_range(-bound..=bound)).collect())
            .collect();
        let b: Vec<i64> = (0..=n).map(|_| rng.gen_range(-bound..=bound)).collect();
        let Ok(sys) = InequalitySystem::from_i64(&a, &b) else {
            continue;
        };
        if validate_simplex(&sys).is_ok() {
            return sys;
        }
    }
}

fn shuffled(rng: &mut ChaCha8Rng, sys: &InequalitySystem) -> InequalitySystem {
    let mut order: Vec<usize> = (0..=sys.dim()).collect();
    order.shuffle(rng);
    sys.permute_rows(&order)
}

/// `W(S) = T` for the witness of `check_equivalence(S, T)`.
fn witness_holds(s: &InequalitySystem, t: &InequalitySystem, w: &AffineUnimodularMap) -> bool {
    let back = apply_map(t, w).unwrap();
    same_facets(&primitivize(&back).unwrap(), &primitivize(s).unwrap())
}

fn c1() -> Outcome {
    let mut times = Vec::new();
    for n in 1..=6 {
        let start = Instant::now();
        let records = atlas(1, n, false);
        let elapsed = start.elapsed();
        ensure(count(&records, Family::Empty) == 0, || {
            format!("n = {n}: empty classes present")
        })?;
        ensure(
            records.len() == 1 && records[0].family == Family::LatticeEmpty,
            || format!("n = {n}: {} records", records.len()),
        )?;
        let mut a = vec![vec![0i64; n]; n + 1];
        for (i, row) in a.iter_mut().take(n).enumerate() {
            row[i] = 1;
        }
        a[n] = vec![-1; n];
        let mut b = vec![0i64; n + 1];
        b[n] = 1;
        let standard = InequalitySystem::from_i64(&a, &b).unwrap();
        let verdict = check_equivalence(&standard, &records[0].system.to_system()).unwrap();
        ensure(verdict.is_equivalent(), || {
            format!("n = {n}: not the standard simplex")
        })?;
        ensure(elapsed < Duration::from_secs(1), || {
            format!("n = {n}: {elapsed:.2?}")
        })?;
        times.push(format!("{elapsed:.0?}"));
    }
    Ok(format!(
        "1 lattice class, 0 empty for n = 1..6; times {}",
        times.join(" ")
    ))
}

fn c2() -> Outcome {
    for n in [1, 2] {
        let records = atlas(2, n, false);
        ensure(records.is_empty(), || {
            format!("n = {n}: {} records", records.len())
        })?;
    }
    Ok("no classes for n = 1, 2".into())
}

/// Endpoints of a segment system, or `None` if it is not a bounded segment.
fn segment(sys: &InequalitySystem) -> Option<(BigRational, BigRational)> {
    let mut lo: Option<BigRational> = None;
    let mut hi: Option<BigRational> = None;
    for i in 0..2 {
        let a = sys.a().get(i, 0);
        if a.is_zero() {
            return None;
        }
        let bound = BigRational::new(sys.b()[i].clone(), a.clone());
        if a.is_positive() {
            hi = Some(hi.map_or(bound.clone(), |h| h.min(bound)));
        } else {
            lo = Some(lo.map_or(bound.clone(), |l| l.max(bound)));
        }
    }
    let (lo, hi) = (lo?, hi?);
    (lo < hi).then_some((lo, hi))
}

/// Shift into `(0, 1)` and pick the lesser of the segment and its mirror image.
fn canonical_segment((lo, hi): (BigRational, BigRational)) -> (BigRational, BigRational) {
    let shift = BigRational::from_integer(lo.floor().to_integer());
    let (l, u) = (&lo - &shift, &hi - &shift);
    let one = BigRational::one();
    let mirror = (&one - &u, &one - &l);
    (l, u).min(mirror)
}

fn c3() -> Outcome {
    let records = atlas(3, 1, false);
    ensure(count(&records, Family::LatticeEmpty) == 0, || {
        "lattice classes present".into()
    })?;
    ensure(count(&records, Family::Empty) == 2, || {
        format!("{} empty classes", count(&records, Family::Empty))
    })?;
    let mut brute = BTreeSet::new();
    for a0 in -3i64..=3 {
        for a1 in -3i64..=3 {
            for b0 in -9i64..=9 {
                for b1 in -9i64..=9 {
                    let sys = InequalitySystem::from_i64(&[[a0], [a1]], &[b0, b1]).unwrap();
                    let Some(seg) = segment(&sys) else { continue };
                    if seg.0.ceil() <= seg.1 {
                        continue;
                    }
                    let meta = validate_simplex(&primitivize(&sys).unwrap()).unwrap();
                    if meta.delta == BigInt::from(3) {
                        brute.insert(canonical_segment(seg));
                    }
                }
            }
        }
    }
    let from_atlas: BTreeSet<_> = records
        .iter()
        .map(|r| canonical_segment(segment(&r.system.to_system()).unwrap()))
        .collect();
    ensure(brute == from_atlas, || {
        format!("brute force {brute:?} vs atlas {from_atlas:?}")
    })?;
    let shown: Vec<String> = brute.iter().map(|(l, u)| format!("[{l}, {u}]")).collect();
    Ok(format!(
        "2 empty classes {}, matching the segment scan",
        shown.join(" ")
    ))
}

fn bound(delta: u64, n: usize) -> f64 {
    let (top, k) = (n as u64 + delta - 1, delta - 1);
    let mut binom = 1f64;
    for i in 0..k {
        binom = binom * (top - i) as f64 / (i + 1) as f64;
    }
    let d = delta as f64;
    binom * d.powf(d.log2() + 2.0)
}

fn c4(all: &[(usize, Vec<AtlasRecord>)]) -> Outcome {
    let mut worst = 0f64;
    for (n, records) in all {
        for delta in 1..=4u64 {
            let found = records
                .iter()
                .filter(|r| r.family == Family::Empty && *r.delta() == BigInt::from(delta))
                .count();
            let limit = bound(delta, *n);
            ensure(found as f64 <= limit, || {
                format!("Δ = {delta}, n = {n}: {found} > {limit}")
            })?;
            worst = worst.max(found as f64 / limit);
        }
    }
    Ok(format!(
        "all 24 (Δ, n) within the bound; largest ratio {worst:.4}"
    ))
}

fn c5(all: &[(usize, Vec<AtlasRecord>)]) -> Outcome {
    let mut checked = 0;
    for (n, records) in all.iter().filter(|(n, _)| *n <= 4) {
        for r in records {
            let points =
                count_integer_points_bruteforce(&r.system.to_system(), 10_000_000).unwrap();
            let expected = match r.family {
                Family::Empty => 0,
                Family::LatticeEmpty => *n as u64 + 1,
            };
            ensure(points == expected, || format!("{}: {points} points", r.key))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} records with n <= 4, zero failures"))
}

fn c6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for case in 0..500 {
        let n = rng.gen_range(1..=4);
        let hm = random_hnf(&mut rng, n, 20);
        let delta = det(&hm).unwrap();
        let raw: IntVector = (0..n)
            .map(|_| BigInt::from(rng.gen_range(-40..=40)))
            .collect();
        let h = reduce_residue(&hm, &raw).unwrap();
        let paral = enumerate_paral(&hm);
        let c = paral[rng.gen_range(0..paral.len())].clone();
        let sol = corner_minimum(&hm, &h, &c).unwrap();
        let mut radius = 2;
        let oracle = loop {
            match corner_minimum_bruteforce(&hm, &h, &c, radius) {
                Ok(s) => break s,
                Err(_) => radius *= 2,
            }
        };
        ensure(sol.f_star == oracle.f_star, || {
            format!("case {case}: {} vs oracle {}", sol.f_star, oracle.f_star)
        })?;
        let x = &sol.witness_x;
        ensure(dot(&c, x) == sol.f_star, || {
            format!("case {case}: witness value")
        })?;
        let hx = hm.mul_vec(x);
        ensure(hx.iter().zip(&h).all(|(l, r)| l <= r), || {
            format!("case {case}: witness infeasible")
        })?;
        let table = GroupTable::new(&hm).unwrap();
        let solver = CornerSolver::new(&table, &hm, &c).unwrap();
        let scaled = dot(&adjugate(&hm).unwrap().vec_mul(&c), &h)
            + BigInt::from(solver.distance(table.class_of(&h)));
        ensure((&scaled % &delta).is_zero(), || {
            format!("case {case}: {scaled} not divisible by {delta}")
        })?;
    }
    Ok("500 instances agree with the box scan; divisibility holds".into())
}

/// `c` with `0 < -(adj(H)^T c)_i <= Δ`, scanned over `‖c‖∞ <= nΔ`.
fn paral_scan(hm: &IntMatrix) -> BTreeSet<Vec<i64>> {
    let n = hm.rows();
    let delta = det(hm).unwrap().to_i64().unwrap();
    let adj: Vec<Vec<i64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| adjugate(hm).unwrap().get(j, i).to_i64().unwrap())
                .collect()
        })
        .collect();
    let r = n as i64 * delta;
    let mut found = BTreeSet::new();
    let mut c = vec![-r; n];
    loop {
        let inside = adj.iter().all(|row| {
            let t = -row.iter().zip(&c).map(|(a, b)| a * b).sum::<i64>();
            0 < t && t <= delta
        });
        if inside {
            found.insert(c.clone());
        }
        let mut i = 0;
        while i < n && c[i] == r {
            c[i] = -r;
            i += 1;
        }
        if i == n {
            return found;
        }
        c[i] += 1;
    }
}

fn c7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..200 {
        let n = rng.gen_range(1..=4);
        let max_det = if n == 4 { 8 } else { 30 };
        let hm = random_hnf(&mut rng, n, max_det);
        let delta = det(&hm).unwrap();
        let listed = enumerate_paral(&hm);
        let distinct: BTreeSet<Vec<i64>> = listed
            .iter()
            .map(|c| c.iter().map(|x| x.to_i64().unwrap()).collect())
            .collect();
        ensure(
            BigInt::from(listed.len()) == delta && distinct.len() == listed.len(),
            || format!("case {case}: {} vectors for Δ = {delta}", listed.len()),
        )?;
        for c in &listed {
            let t = paral_coordinates(&hm, c).unwrap();
            ensure(
                t.iter()
                    .all(|q| q.is_positive() && *q <= BigRational::one()),
                || format!("case {case}: {c:?} outside paral"),
            )?;
        }
        ensure(distinct == paral_scan(&hm), || {
            format!("case {case}: scan differs")
        })?;
    }
    Ok("200 HNFs (Δ <= 30; Δ <= 8 when n = 4) match the scan".into())
}

fn c8(reps: &[AtlasRecord]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for case in 0..200 {
        let n = rng.gen_range(1..=5);
        let s = random_simplex(&mut rng, n, 6);
        let m = random_map(&mut rng, n, 10, 10);
        let t = shuffled(&mut rng, &apply_map(&s, &m).unwrap());
        match check_equivalence(&s, &t).unwrap() {
            Verdict::Equivalent { witness } => ensure(witness_holds(&s, &t, &witness), || {
                format!("case {case}: witness fails")
            })?,
            Verdict::NotEquivalent { certificate } => {
                return Err(format!(
                    "case {case}: rejected with {}",
                    certificate.as_str()
                ))
            }
        }
    }
    for case in 0..100 {
        let i = rng.gen_range(0..reps.len());
        let j = (i + rng.gen_range(1..reps.len())) % reps.len();
        let m = random_map(&mut rng, reps[j].n(), 10, 10);
        let t = apply_map(&reps[j].system.to_system(), &m).unwrap();
        let verdict = check_equivalence(&reps[i].system.to_system(), &t).unwrap();
        ensure(!verdict.is_equivalent(), || {
            format!("pair {case}: {} ~ {}", reps[i].key, reps[j].key)
        })?;
    }
    Ok(format!(
        "200 images recognised; 100 cross-pairs from {} representatives rejected",
        reps.len()
    ))
}

fn inverse_within(m: &AffineUnimodularMap, u_bound: i64, x_bound: i64) -> bool {
    let inv = adjugate(m.u()).unwrap().scale(&det(m.u()).unwrap());
    let x: IntVector = inv.mul_vec(m.x0()).iter().map(|v| -v).collect();
    inv.max_abs() <= BigInt::from(u_bound) && x.iter().all(|v| v.abs() <= BigInt::from(x_bound))
}

fn c9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut pairs, mut equivalent) = (0, 0);
    for n in [1, 2] {
        let reps = atlas(3, n, true);
        let mut systems = Vec::new();
        for r in &reps {
            let s = r.system.to_system();
            systems.push(s.clone());
            let mut added = 0;
            while added < 2 {
                let m = random_map(&mut rng, n, 2, 3);
                if inverse_within(&m, 3, 5) && m.u().max_abs() <= BigInt::from(3) {
                    systems.push(apply_map(&s, &m).unwrap());
                    added += 1;
                }
            }
        }
        for s in &systems {
            for t in &systems {
                let verdict = check_equivalence(s, t).unwrap();
                let oracle = brute_force_equivalent(s, t, 3, 5).unwrap();
                ensure(verdict.is_equivalent() == oracle.is_some(), || {
                    format!("n = {n}: verdict {verdict:?}, oracle {oracle:?}")
                })?;
                pairs += 1;
                equivalent += usize::from(oracle.is_some());
            }
        }
    }
    Ok(format!("{pairs} pairs agree ({equivalent} equivalent)"))
}

fn c10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for case in 0..500 {
        let n = rng.gen_range(1..=5);
        let hm = random_hnf(&mut rng, n, 30);
        let b: IntVector = (0..n)
            .map(|_| BigInt::from(rng.gen_range(-60..=60)))
            .collect();
        let (h, x0) = reduce_rhs(&hm, &b).unwrap();
        let reduced = |x: &IntVector| -> bool {
            let hx = hm.mul_vec(x);
            (0..n).all(|i| {
                let r = &b[i] - &hx[i];
                !r.is_negative() && &r < hm.get(i, i)
            })
        };
        let hx = hm.mul_vec(&x0);
        ensure(
            b.iter()
                .zip(&hx)
                .zip(&h)
                .all(|((bi, hi), ri)| bi - hi == *ri),
            || format!("case {case}: h != b - H x0"),
        )?;
        ensure(reduced(&x0), || {
            format!("case {case}: returned h not reduced")
        })?;
        for j in 0..n {
            for step in [-1, 1] {
                let mut y = x0.clone();
                y[j] += step;
                ensure(!reduced(&y), || {
                    format!("case {case}: x0 {step:+} e_{j} also reduces")
                })?;
            }
        }
    }
    Ok("500 cases; every unit perturbation breaks the bounds".into())
}

fn c11(all: &[(usize, Vec<AtlasRecord>)], extra: &[AtlasRecord]) -> Outcome {
    let mut checked = 0;
    let mut widest = BigRational::zero();
    for r in all.iter().flat_map(|(_, rs)| rs).chain(extra) {
        let ns = &r.system;
        let v = solve_rational(ns.h_matrix(), ns.h()).unwrap();
        let cv: BigRational = ns
            .c()
            .iter()
            .zip(&v)
            .map(|(c, x)| x * BigRational::from_integer(c.clone()))
            .sum();
        let gap = (BigRational::from_integer(ns.c0().clone()) - cv).abs();
        ensure(gap <= BigRational::from_integer(ns.delta().clone()), || {
            format!("{}: gap {gap}", r.key)
        })?;
        widest = widest.max(gap / BigRational::from_integer(ns.delta().clone()));
        checked += 1;
    }
    Ok(format!("{checked} records; largest gap/Δ = {widest}"))
}

fn run_cli(args: &[&str], jobs: usize, out: &Path) -> Duration {
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_delta-simplex"))
        .args(args)
        .arg("--jobs")
        .arg(jobs.to_string())
        .arg("--out")
        .arg(out)
        .stderr(std::process::Stdio::null())
        .status()
        .unwrap();
    assert!(status.success(), "{args:?} failed");
    start.elapsed()
}

fn c12() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "enumerate",
        "--delta",
        "3",
        "--dim",
        "5",
        "--family",
        "both",
    ];
    let mut outputs = Vec::new();
    for (i, jobs) in [1, 1, 8, 8].into_iter().enumerate() {
        let path = dir.path().join(format!("run{i}.jsonl"));
        run_cli(&args, jobs, &path);
        outputs.push(std::fs::read(&path).unwrap());
    }
    ensure(outputs.iter().all(|o| *o == outputs[0]), || {
        "outputs differ".into()
    })?;
    ensure(!outputs[0].is_empty(), || "empty atlas".into())?;
    Ok(format!(
        "4 runs (jobs 1, 1, 8, 8) byte-identical, {} bytes",
        outputs[0].len()
    ))
}

fn c13() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut notes = Vec::new();
    for (delta, n, budget) in [("3", "8", 300u64), ("4", "6", 900)] {
        let path = dir.path().join(format!("scale-{delta}-{n}.jsonl"));
        let args = [
            "enumerate",
            "--delta",
            delta,
            "--dim",
            n,
            "--family",
            "both",
        ];
        let elapsed = run_cli(&args, jobs, &path);
        let lines = std::fs::read_to_string(&path).unwrap().lines().count();
        ensure(elapsed < Duration::from_secs(budget), || {
            format!("Δ = {delta}, n = {n}: {elapsed:.1?}")
        })?;
        notes.push(format!(
            "(Δ={delta}, n={n}) {lines} records in {elapsed:.2?}"
        ));
    }
    Ok(notes.join("; "))
}

fn main() {
    let mut failed = 0;
    let mut report = |id: usize, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {id:>2}: PASS ({secs:.1}s) {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id:>2}: FAIL ({secs:.1}s) {detail}");
            }
        }
    };

    let all: Vec<(usize, Vec<AtlasRecord>)> = (1..=6).map(|n| (n, atlas(4, n, true))).collect();
    let large = atlas(3, 8, false);
    let reps: Vec<AtlasRecord> = all
        .iter()
        .filter(|(n, _)| (2..=4).contains(n))
        .flat_map(|(_, rs)| rs.iter().cloned())
        .filter(|r| r.n() == 3)
        .collect();

    report(1, &mut c1);
    report(2, &mut c2);
    report(3, &mut c3);
    report(4, &mut || c4(&all));
    report(5, &mut || c5(&all));
    report(6, &mut c6);
    report(7, &mut c7);
    report(8, &mut || c8(&reps));
    report(9, &mut c9);
    report(10, &mut c10);
    report(11, &mut || c11(&all, &large));
    report(12, &mut c12);
    report(13, &mut c13);

    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
