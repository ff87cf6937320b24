//! Acceptance criteria. Each test prints one PASS/FAIL line on stderr.
//! Tests hold a shared lock so timed runs do not overlap.

use std::io::Write;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use unimod::bench::{geometric_mean, network_p};
use unimod::engine::{
    check_certificate, check_violator, is_totally_unimodular, mutate_certificate, verify_certificate,
    CertificateTree, Violator,
};
use unimod::generators::{gen_network_matrix, gen_odd_cycle_violator, gen_random_signed};
use unimod::oracles::{brute_force_tu, ce_ghouila_houri, det_ternary, st_camion};
use unimod::signing::sign_matrix;
use unimod::unimodular::{is_strongly_unimodular, is_unimodular, IntegerMatrix};
use unimod::{BinaryMatrix, TernaryMatrix};

static LOCK: Mutex<()> = Mutex::new(());

fn serial() -> std::sync::MutexGuard<'static, ()> {
    LOCK.lock().unwrap_or_else(|e| e.into_inner())
}

fn report(name: &str, failures: &[String], detail: String) {
    let pass = failures.is_empty();
    let _ = writeln!(std::io::stderr(), "{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{name}: {}", failures.iter().take(5).join("; "));
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let s = Instant::now();
    let r = f();
    (r, s.elapsed().as_secs_f64())
}

fn random_ternary(rng: &mut ChaCha8Rng, m: usize, n: usize) -> TernaryMatrix {
    let p = rng.gen_range(0.2..0.8);
    let rows: Vec<Vec<i64>> = (0..m)
        .map(|_| (0..n).map(|_| if rng.gen_bool(p) { if rng.gen_bool(0.5) { 1 } else { -1 } } else { 0 }).collect())
        .collect();
    let a = TernaryMatrix::from_rows(&rows).unwrap();
    // half of the inputs are signed so that both verdicts occur often
    if rng.gen_bool(0.5) {
        sign_matrix(&a, false).result
    } else {
        a
    }
}

/// Violator soundness: |det| >= 2, and for order <= 8 every single-line
/// deletion is t.u. by the determinant oracle.
fn violator_problems(a: &TernaryMatrix, v: &Violator) -> Vec<String> {
    let mut out = Vec::new();
    let sub = a.submatrix_by_labels(&v.rows, &v.cols);
    let k = v.rows.len();
    if v.cols.len() != k || det_ternary(&sub).magnitude() < &2u32.into() {
        out.push(format!("violator {:?}/{:?} is not square with |det| >= 2", v.rows, v.cols));
        return out;
    }
    if k <= 8 && k > 1 {
        let all: Vec<usize> = (0..k).collect();
        for i in 0..k {
            let rest: Vec<usize> = (0..k).filter(|&x| x != i).collect();
            for d in [sub.submatrix(&rest, &all), sub.submatrix(&all, &rest)] {
                if !brute_force_tu(&d).unwrap().is_tu() {
                    out.push(format!("violator of order {k} has a non-t.u. single-line deletion"));
                }
            }
        }
    }
    out
}

#[test]
fn oracle_equivalence_exhaustive_3x3() {
    let _g = serial();
    let mut failures = Vec::new();
    let (count, secs) = timed(|| {
        let mut count = 0;
        for code in 0..3usize.pow(9) {
            let mut c = code;
            let rows: Vec<Vec<i64>> = (0..3)
                .map(|_| {
                    (0..3)
                        .map(|_| {
                            let v = (c % 3) as i64 - 1;
                            c /= 3;
                            v
                        })
                        .collect()
                })
                .collect();
            let a = TernaryMatrix::from_rows(&rows).unwrap();
            let dt = is_totally_unimodular(&a, false).unwrap().tu;
            if dt != brute_force_tu(&a).unwrap().is_tu() {
                failures.push(format!("{rows:?}"));
            }
            count += 1;
        }
        count
    });
    if secs >= 60.0 {
        failures.push(format!("took {secs:.1} s"));
    }
    report(
        "oracle equivalence, all 3x3 ternary matrices",
        &failures,
        format!("{count} matrices, {} disagreements, {secs:.2} s (limit 60 s)", failures.len()),
    );
}

#[test]
fn oracle_equivalence_randomized() {
    let _g = serial();
    let mut failures = Vec::new();
    let mut tu = 0;
    let mut total = 0;
    for n in 4..=6 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + n as u64);
        for _ in 0..1000 {
            let a = random_ternary(&mut rng, n, n);
            let dt = is_totally_unimodular(&a, false).unwrap().tu;
            let bf = brute_force_tu(&a).unwrap().is_tu();
            let st = st_camion(&a, None).decided().unwrap();
            let ce = ce_ghouila_houri(&a, None).decided().unwrap();
            if !(dt == bf && bf == st && st == ce) {
                failures.push(format!("dt {dt} bf {bf} st {st} ce {ce} on {:?}", a.to_rows()));
            }
            tu += bf as usize;
            total += 1;
        }
    }
    report(
        "oracle equivalence, random 4x4 to 6x6 (DT = brute force = ST = CE)",
        &failures,
        format!("{total} matrices ({tu} t.u.), {} disagreements", failures.len()),
    );
}

#[test]
fn network_matrices_are_tu_with_certificates() {
    let _g = serial();
    let mut failures = Vec::new();
    let mut lines = Vec::new();
    let mut t400 = 0.0;
    for (k, &size) in [10usize, 24, 50, 100, 200, 400].iter().enumerate() {
        let (a, _) = gen_network_matrix(size + 1, network_p(size), 1000 + k as u64).unwrap();
        let (r, secs) = timed(|| is_totally_unimodular(&a, false).unwrap());
        if size == 400 {
            t400 = secs;
        }
        match r.certificate {
            Some(t) if r.tu => {
                if let Err(e) = check_certificate(&a, &t) {
                    failures.push(format!("{size}: certificate rejected: {e}"));
                }
            }
            _ => failures.push(format!("{size}: not declared t.u.")),
        }
        lines.push(format!("{}x{} {secs:.2}s", a.nrows(), a.ncols()));
    }
    if t400 >= 60.0 {
        failures.push(format!("400 took {t400:.1} s"));
    }
    // enumerative methods on the 24-row instance, both under a 60 s budget
    let (a24, _) = gen_network_matrix(25, network_p(24), 1001).unwrap();
    let budget = Duration::from_secs(60);
    let (st, ce) = std::thread::scope(|s| {
        let st = s.spawn(|| st_camion(&a24, Some(budget)));
        let ce = s.spawn(|| ce_ghouila_houri(&a24, Some(budget)));
        (st.join().unwrap(), ce.join().unwrap())
    });
    if !st.is_timeout() {
        failures.push(format!("ST at 24 rows did not time out: {st:?}"));
    }
    if !ce.is_timeout() {
        failures.push(format!("CE at 24 rows did not time out: {ce:?}"));
    }
    report(
        "network matrices 10-400 t.u. with verified certificates; ST/CE time out at 24",
        &failures,
        format!("DT {}; ST timeout {}, CE timeout {}", lines.join(", "), st.is_timeout(), ce.is_timeout()),
    );
}

#[test]
fn odd_cycle_matrices_are_not_tu() {
    let _g = serial();
    let mut failures = Vec::new();
    let mut lines = Vec::new();
    for n in (11..=101).step_by(10) {
        let a = gen_odd_cycle_violator(n, false, 0).unwrap();
        let (r, secs) = timed(|| is_totally_unimodular(&a, false).unwrap());
        if r.tu {
            failures.push(format!("n={n} declared t.u."));
        }
        if n == 101 && secs >= 120.0 {
            failures.push(format!("DT at n=101 took {secs:.1} s"));
        }
        let mut line = format!("n={n} DT {secs:.2}s");
        if n <= 51 || n == 101 {
            let (r, vsecs) = timed(|| is_totally_unimodular(&a, true).unwrap());
            let limit = if n == 101 { 3600.0 } else { 300.0 };
            if vsecs >= limit {
                failures.push(format!("DT&V at n={n} took {vsecs:.1} s"));
            }
            match &r.violator {
                Some(v) => {
                    if let Err(e) = check_violator(&a, v) {
                        failures.push(format!("n={n}: {e}"));
                    }
                    if !v.minimal {
                        failures.push(format!("n={n}: violator not flagged minimal"));
                    }
                    line.push_str(&format!(" DT&V {vsecs:.2}s order {}", v.rows.len()));
                }
                None => failures.push(format!("n={n}: no violator")),
            }
        }
        lines.push(line);
    }
    report("odd-cycle matrices n=11..101 not t.u., verified minimal violators", &failures, lines.join(", "));
}

#[test]
fn random_matrices_are_not_tu() {
    let _g = serial();
    let mut failures = Vec::new();
    let mut lines = Vec::new();
    for n in [50usize, 100, 200] {
        for (pk, p) in [0.5f64, 0.25].into_iter().enumerate() {
            let mut dt_times = Vec::new();
            let mut dtv_times = Vec::new();
            for rep in 0..10u64 {
                let a = gen_random_signed(n, p, 5000 + 100 * n as u64 + 10 * pk as u64 + rep).unwrap();
                let (r, secs) = timed(|| is_totally_unimodular(&a, false).unwrap());
                if r.tu {
                    failures.push(format!("n={n} p={p} rep {rep} declared t.u."));
                }
                if secs >= 60.0 {
                    failures.push(format!("n={n} p={p} rep {rep} DT took {secs:.1} s"));
                }
                dt_times.push(secs);
                let (r, vsecs) = timed(|| is_totally_unimodular(&a, true).unwrap());
                dtv_times.push(vsecs);
                match &r.violator {
                    Some(v) => failures.extend(violator_problems(&a, v)),
                    None => failures.push(format!("n={n} p={p} rep {rep}: no violator")),
                }
            }
            let (gdt, gdtv) = (geometric_mean(&dt_times), geometric_mean(&dtv_times));
            if gdtv > 3.0 * gdt {
                failures.push(format!("n={n} p={p}: DT&V {gdtv:.3} s > 3 x DT {gdt:.3} s"));
            }
            let max = dt_times.iter().cloned().fold(0.0, f64::max);
            lines.push(format!("n={n} p={p} DT {gdt:.2}s (max {max:.3}s) DT&V {gdtv:.2}s"));
        }
    }
    report("random signed matrices n=50..200 not t.u., DT&V within 3x DT", &failures, lines.join(", "));
}

#[test]
fn minimal_violator_soundness() {
    let _g = serial();
    let mut failures = Vec::new();
    let mut count = 0;
    let mut orders = std::collections::BTreeMap::new();
    let mut record = |a: &TernaryMatrix, failures: &mut Vec<String>| {
        let r = is_totally_unimodular(a, true).unwrap();
        if let Some(v) = r.violator {
            failures.extend(violator_problems(a, &v));
            if let Err(e) = check_violator(a, &v) {
                failures.push(e.to_string());
            }
            *orders.entry(v.rows.len()).or_insert(0) += 1;
            count += 1;
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..500 {
        let (m, n) = (rng.gen_range(3..=9), rng.gen_range(3..=9));
        let a = random_ternary(&mut rng, m, n);
        record(&a, &mut failures);
    }
    for n in [50usize, 100] {
        for seed in 0..5 {
            record(&gen_random_signed(n, 0.25, seed).unwrap(), &mut failures);
        }
    }
    for n in (5..=31).step_by(2) {
        record(&gen_odd_cycle_violator(n, false, 0).unwrap(), &mut failures);
        record(&gen_odd_cycle_violator(n, true, 0).unwrap(), &mut failures);
    }
    let a9 = gen_odd_cycle_violator(9, true, 0).unwrap();
    let v9 = is_totally_unimodular(&a9, true).unwrap().violator.unwrap();
    if v9.rows.len() != 4 {
        failures.push(format!("pivoted odd cycle n=9 gave order {}", v9.rows.len()));
    }
    report(
        "minimal violators sound; pivoted odd cycle n=9 has order 4",
        &failures,
        format!("{count} violators checked, orders {orders:?}, pivoted n=9 order {}", v9.rows.len()),
    );
}

fn mutation_problems(a: &TernaryMatrix, t: &CertificateTree, what: &str) -> Vec<String> {
    let mut out = Vec::new();
    if !verify_certificate(a, t) {
        out.push(format!("{what}: certificate rejected"));
        return out;
    }
    for k in 0..20 {
        match mutate_certificate(t, k) {
            Some(bad) if !verify_certificate(a, &bad) => {}
            Some(_) => out.push(format!("{what}: mutation {k} accepted")),
            None => out.push(format!("{what}: mutation {k} unavailable")),
        }
    }
    out
}

#[test]
fn certificate_soundness() {
    let _g = serial();
    let mut failures = Vec::new();
    let mut certs = 0;
    let mut push = |a: &TernaryMatrix, what: String, failures: &mut Vec<String>| {
        let r = is_totally_unimodular(a, false).unwrap();
        if let Some(t) = r.certificate {
            failures.extend(mutation_problems(a, &t, &what));
            certs += 1;
        }
    };
    for (k, size) in [10usize, 24, 50, 100].into_iter().enumerate() {
        for seed in 0..3 {
            let (a, _) = gen_network_matrix(size + 1, network_p(size), 7000 + 10 * k as u64 + seed).unwrap();
            push(&a, format!("network {size} seed {seed}"), &mut failures);
        }
    }
    let r12 = BinaryMatrix::from_rows(&[
        vec![1, 1, 1, 0, 0, 0],
        vec![1, 1, 0, 1, 0, 0],
        vec![1, 0, 0, 0, 1, 0],
        vec![0, 1, 0, 0, 0, 1],
        vec![0, 0, 1, 0, 1, 1],
        vec![0, 0, 0, 1, 1, 1],
    ]);
    let signed = |b: &BinaryMatrix| {
        let rows: Vec<Vec<i64>> =
            (0..b.nrows()).map(|i| (0..b.ncols()).map(|j| b.get(i, j) as i64).collect()).collect();
        sign_matrix(&TernaryMatrix::from_rows(&rows).unwrap(), false).result
    };
    push(&signed(&r12), "R12".into(), &mut failures);
    let r10 = unimod::decomposition::r10_canonical();
    for (k, b) in r10.iter().enumerate() {
        push(&signed(b), format!("R10 form {k}"), &mut failures);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut small = 0;
    while small < 300 {
        let (m, n) = (rng.gen_range(3..=8), rng.gen_range(3..=8));
        let rows: Vec<Vec<i64>> = (0..m).map(|_| (0..n).map(|_| rng.gen_bool(0.45) as i64).collect()).collect();
        let a = sign_matrix(&TernaryMatrix::from_rows(&rows).unwrap(), false).result;
        if is_totally_unimodular(&a, false).unwrap().tu {
            push(&a, format!("random {rows:?}"), &mut failures);
            small += 1;
        }
    }
    report(
        "certificates verified, 20 mutations each rejected",
        &failures,
        format!("{certs} certificates, {} mutations", certs * 20),
    );
}

#[test]
fn signing_of_network_supports() {
    let _g = serial();
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut done = 0;
    let mut seed = 0u64;
    while done < 500 {
        seed += 1;
        let v = rng.gen_range(3..=7);
        let p = rng.gen_range(0.3..0.95);
        let Ok((a, _)) = gen_network_matrix(v, p, seed) else { continue };
        if a.nrows() + a.ncols() > 12 || a.ncols() == 0 {
            continue;
        }
        let abs: Vec<Vec<i64>> = a.to_rows().iter().map(|r| r.iter().map(|x| x.abs()).collect()).collect();
        let support = TernaryMatrix::from_rows(&abs).unwrap();
        let s = sign_matrix(&support, false);
        if !brute_force_tu(&s.result).unwrap().is_tu() {
            failures.push(format!("signed support not t.u.: {:?}", s.result.to_rows()));
        }
        let again = sign_matrix(&s.result, false);
        if again.modified || again.result != s.result {
            failures.push(format!("signing not idempotent on {:?}", s.result.to_rows()));
        }
        done += 1;
    }
    let mut idem = 0;
    for _ in 0..500 {
        let (m, n) = (rng.gen_range(1..=8), rng.gen_range(1..=8));
        let a = random_ternary(&mut rng, m, n);
        let once = sign_matrix(&a, false).result;
        let twice = sign_matrix(&once, false);
        if twice.modified || twice.result != once {
            failures.push(format!("signing not idempotent on {:?}", a.to_rows()));
        }
        idem += 1;
    }
    report(
        "signing of network supports is t.u. and idempotent",
        &failures,
        format!("{done} supports, {idem} extra idempotence inputs"),
    );
}

/// Exact determinant by fraction-free elimination.
fn det(mut a: Vec<Vec<i128>>) -> i128 {
    let k = a.len();
    let mut sign = 1;
    let mut prev = 1i128;
    for c in 0..k {
        let Some(p) = (c..k).find(|&i| a[i][c] != 0) else { return 0 };
        if p != c {
            a.swap(p, c);
            sign = -sign;
        }
        for i in c + 1..k {
            for j in c + 1..k {
                a[i][j] = (a[c][c] * a[i][j] - a[i][c] * a[c][j]) / prev;
            }
        }
        prev = a[c][c];
    }
    sign * prev
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn minors(a: &[Vec<i64>], cols: &[usize], r: usize) -> Vec<i128> {
    (0..a.len())
        .combinations(r)
        .map(|rows| det(rows.iter().map(|&i| cols.iter().map(|&j| a[i][j] as i128).collect()).collect()))
        .collect()
}

fn rank(a: &[Vec<i64>]) -> usize {
    let n = a.first().map_or(0, |r| r.len());
    (1..=a.len().min(n))
        .rev()
        .find(|&r| (0..n).combinations(r).any(|c| minors(a, &c, r).iter().any(|&d| d != 0)))
        .unwrap_or(0)
}

/// (unimodular, strongly unimodular) by enumerating every column basis.
fn definition(a: &[Vec<i64>]) -> (bool, bool) {
    let n = a.first().map_or(0, |r| r.len());
    let r = rank(a);
    if r == 0 {
        return (true, true);
    }
    let (mut uni, mut strong) = (true, true);
    for cols in (0..n).combinations(r) {
        let ms = minors(a, &cols, r);
        if ms.iter().all(|&d| d == 0) {
            continue;
        }
        if ms.iter().fold(0, |g, &d| gcd(g, d)) != 1 {
            uni = false;
        }
        if ms.iter().any(|d| d.abs() > 1) {
            strong = false;
        }
    }
    (uni, strong)
}

fn transpose(a: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = a.first().map_or(0, |r| r.len());
    (0..n).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

#[test]
fn unimodularity_against_definition() {
    let _g = serial();
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut uni_count, mut strong_count) = (0, 0);
    for k in 0..200 {
        let m = rng.gen_range(1..=8);
        let n = rng.gen_range(1..=(10 - m).min(8));
        let rows: Vec<Vec<i64>> = match k % 4 {
            // uniform in [-3, 3]
            0 => (0..m).map(|_| (0..n).map(|_| rng.gen_range(-3..=3)).collect()).collect(),
            // mostly {0, ±1}
            1 => (0..m)
                .map(|_| (0..n).map(|_| if rng.gen_bool(0.1) { rng.gen_range(-3..=3) } else { rng.gen_range(-1..=1) }).collect())
                .collect(),
            // product of two {0, ±1} factors, clipped to [-3, 3]
            2 => {
                let r = rng.gen_range(1..=m.min(n));
                let u: Vec<Vec<i64>> = (0..m).map(|_| (0..r).map(|_| rng.gen_range(-1..=1)).collect()).collect();
                let w: Vec<Vec<i64>> = (0..r).map(|_| (0..n).map(|_| rng.gen_range(-1..=1)).collect()).collect();
                (0..m)
                    .map(|i| (0..n).map(|j| (0..r).map(|t| u[i][t] * w[t][j]).sum::<i64>().clamp(-3, 3)).collect())
                    .collect()
            }
            // signed {0, 1} support
            _ => {
                let rows: Vec<Vec<i64>> = (0..m).map(|_| (0..n).map(|_| rng.gen_bool(0.5) as i64).collect()).collect();
                sign_matrix(&TernaryMatrix::from_rows(&rows).unwrap(), false).result.to_rows()
            }
        };
        let a = IntegerMatrix::from_rows(&rows).unwrap();
        let (du, ds) = definition(&rows);
        let (dut, _) = definition(&transpose(&rows));
        let u = is_unimodular(&a).unwrap();
        let s = is_strongly_unimodular(&a).unwrap();
        if u != du || s != ds {
            failures.push(format!("{rows:?}: got ({u}, {s}), definition ({du}, {ds})"));
        }
        if ds != (du && dut) {
            failures.push(format!("{rows:?}: strong != unimodular(A) and unimodular(At) by definition"));
        }
        uni_count += du as usize;
        strong_count += ds as usize;
    }
    report(
        "unimodularity and strong unimodularity against the basis definition",
        &failures,
        format!("200 matrices ({uni_count} unimodular, {strong_count} strongly), {} disagreements", failures.len()),
    );
}
