//! Exact-oracle checks: every displayed protocol state is rebuilt two ways —
//! through the gate pipeline and from an independently written amplitude
//! formula — and compared by fidelity at 1e-10.
//!
//! Two printed reductions are handled informationally: the post-measurement
//! Fourier form of the repaired two-party key and its sectioned analogue
//! double-count the shifted component (the +d and -d shifts coincide modulo
//! 2d), so the oracle state is authoritative and the fidelity against the
//! printed coefficients is reported without failing the check.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;
use crate::qcore::{
    basis_state, bell_state_labeled, ghz_state_labeled, hadamard_gate, pauli_x, shift_gate,
    ControlledGateSpec, Gate, Label, StateVector, SubsystemLayout,
};

#[derive(Debug, Clone, Serialize)]
pub struct EquationCheck {
    pub id: String,
    pub pass: bool,
    pub max_deviation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub info: Option<String>,
}

/// Parameters of the suite; defaults reproduce the documented dimensions.
#[derive(Debug, Clone, Copy)]
pub struct VerifyParams {
    /// Dimension for the d-level checks.
    pub d: usize,
    /// Even key dimension for the repaired-protocol checks.
    pub hd_dim: usize,
    /// Non-orthogonal carrier amplitudes.
    pub alpha: f64,
    pub beta: f64,
}

impl Default for VerifyParams {
    fn default() -> Self {
        VerifyParams {
            d: 3,
            hd_dim: 4,
            alpha: 0.6,
            beta: 0.8,
        }
    }
}

const TOL: f64 = 1e-10;

fn lbl(s: &str) -> Label {
    Label::new(s)
}

fn formula_state(dims: &[usize], labels: &[&str], entries: &[(Vec<usize>, Complex64)]) -> StateVector {
    let layout = SubsystemLayout::new(
        dims.to_vec(),
        labels.iter().map(|s| lbl(s)).collect(),
    )
    .expect("valid layout");
    let mut amps = vec![Complex64::new(0.0, 0.0); layout.total_dim()];
    for (digits, amp) in entries {
        let idx = layout.linear_index(digits).expect("valid index");
        amps[idx] += *amp;
    }
    StateVector::from_amplitudes(layout, amps).expect("normalized formula state")
}

fn check(id: &str, produced: &StateVector, expected: &StateVector) -> EquationCheck {
    let dev = match produced.fidelity(expected) {
        Ok(f) => (1.0 - f).abs(),
        Err(_) => 1.0,
    };
    EquationCheck {
        id: id.to_string(),
        pass: dev < TOL,
        max_deviation: dev,
        info: None,
    }
}

fn check_value(id: &str, got: f64, expected: f64) -> EquationCheck {
    let dev = (got - expected).abs();
    EquationCheck {
        id: id.to_string(),
        pass: dev < TOL,
        max_deviation: dev,
        info: None,
    }
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Bell pair built by formula over (A, B).
fn bell_formula(d: usize) -> StateVector {
    let w = re(1.0 / (d as f64).sqrt());
    let entries: Vec<(Vec<usize>, Complex64)> = (0..d).map(|j| (vec![j, j], w)).collect();
    formula_state(&[d, d], &["A", "B"], &entries)
}

fn ghz_formula(d: usize) -> StateVector {
    let w = re(1.0 / (d as f64).sqrt());
    let entries: Vec<(Vec<usize>, Complex64)> = (0..d).map(|j| (vec![j, j, j], w)).collect();
    formula_state(&[d, d, d], &["a", "b", "c"], &entries)
}

pub fn run_all(params: &VerifyParams) -> Result<Vec<EquationCheck>> {
    let mut out = Vec::new();
    out.push(eq1()?);
    out.extend(eq3_to_5()?);
    out.push(eq7(params.alpha, params.beta)?);
    out.push(eq8(params.d)?);
    out.push(eq10(params.d)?);
    out.push(eq11()?);
    out.push(eq13(params.hd_dim)?);
    out.extend(eq14_15(params.hd_dim)?);
    out.push(eq16(params.hd_dim)?);
    out.push(eq17(params.hd_dim)?);
    out.push(eq18()?);
    out.extend(eq19_to_23()?);
    out.push(eq24(params.hd_dim)?);
    out.extend(eq25_to_27(params.hd_dim)?);
    Ok(out)
}

/// Runs a filtered subset (ids prefixed by `only`, e.g. "eq7").
pub fn run_filtered(params: &VerifyParams, only: Option<&str>) -> Result<Vec<EquationCheck>> {
    let all = run_all(params)?;
    Ok(match only {
        None => all,
        Some(f) => all.into_iter().filter(|c| c.id.starts_with(f)).collect(),
    })
}

fn eq1() -> Result<EquationCheck> {
    let produced = bell_state_labeled(2, lbl("A"), lbl("B"))?;
    Ok(check("eq1", &produced, &bell_formula(2)))
}

/// Encode and decode of the plain two-party round for both carrier bits.
fn eq3_to_5() -> Result<Vec<EquationCheck>> {
    let mut out = Vec::new();
    for q in 0..2usize {
        let key = bell_state_labeled(2, lbl("A"), lbl("B"))?;
        let with_carrier = key.extend_with_basis(lbl("g"), 2, q)?;
        let encoded =
            with_carrier.apply_controlled(&ControlledGateSpec::RightShift, &lbl("A"), &lbl("g"))?;
        let w = re(1.0 / 2f64.sqrt());
        let expected = formula_state(
            &[2, 2, 2],
            &["A", "B", "g"],
            &[(vec![0, 0, q], w), (vec![1, 1, (q + 1) % 2], w)],
        );
        out.push(check(if q == 0 { "eq3" } else { "eq4" }, &encoded, &expected));

        let decoded =
            encoded.apply_controlled(&ControlledGateSpec::RightShift, &lbl("B"), &lbl("g"))?;
        let expected = formula_state(
            &[2, 2, 2],
            &["A", "B", "g"],
            &[(vec![0, 0, q], w), (vec![1, 1, q], w)],
        );
        out.push(check(&format!("eq5.q{q}"), &decoded, &expected));
    }
    Ok(out)
}

fn eq7(alpha: f64, beta: f64) -> Result<EquationCheck> {
    let key = bell_state_labeled(2, lbl("A"), lbl("B"))?;
    let with_carrier = key.extend_with_state(lbl("g"), vec![re(alpha), re(beta)])?;
    let encoded =
        with_carrier.apply_controlled(&ControlledGateSpec::RightShift, &lbl("A"), &lbl("g"))?;
    let w = 1.0 / 2f64.sqrt();
    let psi0 = [alpha, beta];
    let psi1 = [beta, -alpha];
    let c0 = 2.0 * alpha * beta;
    let c1 = beta * beta - alpha * alpha;
    let mut entries = Vec::new();
    for g in 0..2usize {
        entries.push((vec![0, 0, g], re(w * psi0[g])));
        entries.push((vec![1, 1, g], re(w * (c0 * psi0[g] + c1 * psi1[g]))));
    }
    let expected = formula_state(&[2, 2, 2], &["A", "B", "g"], &entries);
    Ok(check("eq7", &encoded, &expected))
}

fn eq8(d: usize) -> Result<EquationCheck> {
    let produced = bell_state_labeled(d, lbl("A"), lbl("B"))?;
    Ok(check("eq8", &produced, &bell_formula(d)))
}

fn eq10(d: usize) -> Result<EquationCheck> {
    let q = 1usize % d;
    let key = bell_state_labeled(d, lbl("A"), lbl("B"))?;
    let with_carrier = key.extend_with_basis(lbl("g"), d, q)?;
    let encoded =
        with_carrier.apply_controlled(&ControlledGateSpec::RightShift, &lbl("A"), &lbl("g"))?;
    let w = re(1.0 / (d as f64).sqrt());
    let entries: Vec<(Vec<usize>, Complex64)> =
        (0..d).map(|j| (vec![j, j, (q + j) % d], w)).collect();
    let expected = formula_state(&[d, d, d], &["A", "B", "g"], &entries);
    Ok(check("eq10", &encoded, &expected))
}

/// The Fourier pair fixes the shared key for every dimension up to eight.
fn eq11() -> Result<EquationCheck> {
    let mut worst: f64 = 0.0;
    for d in 2..=8usize {
        let key = bell_state_labeled(d, lbl("A"), lbl("B"))?;
        let rotated = key
            .apply_single(&hadamard_gate(d, false), &lbl("A"))?
            .apply_single(&hadamard_gate(d, true), &lbl("B"))?;
        worst = worst.max((1.0 - key.fidelity(&rotated)?).abs());
    }
    Ok(EquationCheck {
        id: "eq11".into(),
        pass: worst < TOL,
        max_deviation: worst,
        info: None,
    })
}

fn eq13(hd: usize) -> Result<EquationCheck> {
    let produced = bell_state_labeled(hd, lbl("A"), lbl("B"))?;
    Ok(check("eq13", &produced, &bell_formula(hd)))
}

fn eq14_15(hd: usize) -> Result<Vec<EquationCheck>> {
    let mut out = Vec::new();
    let q = 0usize;
    let key = bell_state_labeled(hd, lbl("A"), lbl("B"))?;
    let with_carrier = key.extend_with_basis(lbl("g"), 2, q)?;
    let flip = ControlledGateSpec::PowerOfU(pauli_x());
    let encoded = with_carrier.apply_controlled(&flip, &lbl("A"), &lbl("g"))?;
    let w = re(1.0 / (hd as f64).sqrt());
    let entries: Vec<(Vec<usize>, Complex64)> =
        (0..hd).map(|j| (vec![j, j, (q + j) % 2], w)).collect();
    let expected = formula_state(&[hd, hd, 2], &["A", "B", "g"], &entries);
    out.push(check("eq14", &encoded, &expected));

    let decoded = encoded.apply_controlled(&flip, &lbl("B"), &lbl("g"))?;
    let entries: Vec<(Vec<usize>, Complex64)> = (0..hd).map(|j| (vec![j, j, q], w)).collect();
    let expected = formula_state(&[hd, hd, 2], &["A", "B", "g"], &entries);
    out.push(check("eq15", &decoded, &expected));
    Ok(out)
}

/// Post-measurement Fourier form of the repaired key. The oracle applies
/// H (x) H* to the even-branch state by brute force and compares against the
/// derived closed form (1/sqrt(2D)) sum_l (|l,l> + |l,l+d mod D>); the
/// printed reduction carries a doubled coefficient because +d and -d
/// coincide mod 2d, and is reported informationally.
fn eq16(hd: usize) -> Result<EquationCheck> {
    let d = hd / 2;
    let w = re((2.0 / hd as f64).sqrt());
    let even_entries: Vec<(Vec<usize>, Complex64)> =
        (0..hd).step_by(2).map(|j| (vec![j, j], w)).collect();
    let even_branch = formula_state(&[hd, hd], &["A", "B"], &even_entries);
    let produced = even_branch
        .apply_single(&hadamard_gate(hd, false), &lbl("A"))?
        .apply_single(&hadamard_gate(hd, true), &lbl("B"))?;

    let w2 = re(1.0 / (2.0 * hd as f64).sqrt());
    let mut entries = Vec::new();
    for l in 0..hd {
        entries.push((vec![l, l], w2));
        entries.push((vec![l, (l + d) % hd], w2));
    }
    let oracle = formula_state(&[hd, hd], &["A", "B"], &entries);
    let mut result = check("eq16", &produced, &oracle);

    // Printed form, normalized: per l the components weigh (1, 2).
    let norm = re(1.0 / (5.0 * hd as f64).sqrt());
    let mut printed_entries = Vec::new();
    for l in 0..hd {
        printed_entries.push((vec![l, l], norm));
        printed_entries.push((vec![l, (l + d) % hd], norm * 2.0));
    }
    let printed = formula_state(&[hd, hd], &["A", "B"], &printed_entries);
    let printed_fid = produced.fidelity(&printed)?;
    result.info = Some(format!(
        "printed coefficient 2 on the shifted component is not norm-preserving mod {hd}; \
         fidelity of the oracle state against the printed form is {printed_fid:.4} (informational)"
    ));
    Ok(result)
}

fn eq17(hd: usize) -> Result<EquationCheck> {
    let k = 2usize;
    let q = 1usize % k;
    let key = bell_state_labeled(hd, lbl("A"), lbl("B"))?;
    let with_carrier = key.extend_with_basis(lbl("g"), k, q)?;
    let spec = ControlledGateSpec::PowerOfU(shift_gate(k));
    let encoded = with_carrier.apply_controlled(&spec, &lbl("A"), &lbl("g"))?;
    // Residue classes j_i = {i, i+k, ...} shift the carrier by i mod k.
    let w = re(1.0 / (hd as f64).sqrt());
    let entries: Vec<(Vec<usize>, Complex64)> = (0..hd)
        .map(|j| (vec![j, j, (q + (j % k)) % k], w))
        .collect();
    let expected = formula_state(&[hd, hd, k], &["A", "B", "g"], &entries);
    Ok(check("eq17", &encoded, &expected))
}

fn eq18() -> Result<EquationCheck> {
    let produced = ghz_state_labeled(2, lbl("a"), lbl("b"), lbl("c"))?;
    Ok(check("eq18", &produced, &ghz_formula(2)))
}

fn eq19_to_23() -> Result<Vec<EquationCheck>> {
    let mut out = Vec::new();
    let q = 0usize;
    let key = ghz_state_labeled(2, lbl("a"), lbl("b"), lbl("c"))?;
    out.push(check("eq19", &key, &ghz_formula(2)));

    // eq20: the key with the fresh |q,q> register appended.
    let pair_layout = SubsystemLayout::new(vec![2, 2], vec![lbl("m1"), lbl("m2")])?;
    let pair = basis_state(pair_layout, &[q, q])?;
    let joint = key.tensor(&pair)?;
    let w = re(1.0 / 2f64.sqrt());
    let expected20 = formula_state(
        &[2, 2, 2, 2, 2],
        &["a", "b", "c", "m1", "m2"],
        &[(vec![0, 0, 0, q, q], w), (vec![1, 1, 1, q, q], w)],
    );
    out.push(check("eq20", &joint, &expected20));

    // eq21: both controlled flips from Alice's key particle.
    let flip = ControlledGateSpec::PowerOfU(pauli_x());
    let coded = joint
        .apply_controlled(&flip, &lbl("a"), &lbl("m1"))?
        .apply_controlled(&flip, &lbl("a"), &lbl("m2"))?;
    let expected21 = formula_state(
        &[2, 2, 2, 2, 2],
        &["a", "b", "c", "m1", "m2"],
        &[
            (vec![0, 0, 0, q, q], w),
            (vec![1, 1, 1, (q + 1) % 2, (q + 1) % 2], w),
        ],
    );
    out.push(check("eq21", &coded, &expected21));

    // eq22/eq23: an interception measurement of the flying qubits collapses
    // the coded state onto one of two product branches, each at weight 1/2.
    for (id, outcome) in [("eq22", q), ("eq23", (q + 1) % 2)] {
        let (rec, collapsed) = coded.project_z(&lbl("m1"), outcome)?;
        let mut c = check_value(&format!("{id}.weight"), rec.probability, 0.5);
        let j = if outcome == q { 0 } else { 1 };
        let expected = formula_state(
            &[2, 2, 2, 2, 2],
            &["a", "b", "c", "m1", "m2"],
            &[(vec![j, j, j, outcome, outcome], re(1.0))],
        );
        let state_check = check(id, &collapsed, &expected);
        c.pass &= state_check.pass;
        c.max_deviation = c.max_deviation.max(state_check.max_deviation);
        c.id = id.to_string();
        out.push(c);
    }
    Ok(out)
}

fn eq24(hd: usize) -> Result<EquationCheck> {
    let produced = ghz_state_labeled(hd, lbl("a"), lbl("b"), lbl("c"))?;
    Ok(check("eq24", &produced, &ghz_formula(hd)))
}

fn eq25_to_27(hd: usize) -> Result<Vec<EquationCheck>> {
    let mut out = Vec::new();
    let q = 1usize;
    let key = ghz_state_labeled(hd, lbl("a"), lbl("b"), lbl("c"))?;
    let pair_layout = SubsystemLayout::new(vec![2, 2], vec![lbl("m1"), lbl("m2")])?;
    let joint = key.tensor(&basis_state(pair_layout, &[q, q])?)?;
    let flip = ControlledGateSpec::PowerOfU(pauli_x());
    let coded = joint
        .apply_controlled(&flip, &lbl("a"), &lbl("m1"))?
        .apply_controlled(&flip, &lbl("a"), &lbl("m2"))?;
    let w = re(1.0 / (hd as f64).sqrt());
    let entries: Vec<(Vec<usize>, Complex64)> = (0..hd)
        .map(|j| {
            let bit = (q + j) % 2;
            (vec![j, j, j, bit, bit], w)
        })
        .collect();
    let expected25 = formula_state(&[hd, hd, hd, 2, 2], &["a", "b", "c", "m1", "m2"], &entries);
    out.push(check("eq25", &coded, &expected25));

    // eq26: the all-party Fourier form of the GHZ key. The printed
    // constraint (sum of indices in {0, D, 2D}) is exactly the mod-D
    // condition, so the formula is taken at face value.
    let fourier = key
        .apply_single(&hadamard_gate(hd, false), &lbl("a"))?
        .apply_single(&hadamard_gate(hd, false), &lbl("b"))?
        .apply_single(&hadamard_gate(hd, false), &lbl("c"))?;
    let w26 = re(1.0 / hd as f64);
    let mut entries = Vec::new();
    for l1 in 0..hd {
        for l2 in 0..hd {
            for l3 in 0..hd {
                if (l1 + l2 + l3) % hd == 0 {
                    entries.push((vec![l1, l2, l3], w26));
                }
            }
        }
    }
    let expected26 = formula_state(&[hd, hd, hd], &["a", "b", "c"], &entries);
    out.push(check("eq26", &fourier, &expected26));

    // eq26 coded form: a single controlled flip entangles the codeword.
    let cw = crate::protocols::codeword_amplitudes_public(q as u32);
    let cw_layout = SubsystemLayout::new(vec![2, 2], vec![lbl("m1"), lbl("m2")])?;
    let coded_even = fourier
        .tensor(&StateVector::from_amplitudes(cw_layout, cw)?)?
        .apply_controlled(&flip, &lbl("a"), &lbl("m1"))?;
    let wcw = re(1.0 / (2f64.sqrt() * hd as f64));
    let mut entries = Vec::new();
    for l1 in 0..hd {
        for l2 in 0..hd {
            for l3 in 0..hd {
                if (l1 + l2 + l3) % hd != 0 {
                    continue;
                }
                let eff = (q + (l1 % 2)) % 2;
                // codeword |eff-bar> = (|0,eff> + |1,1+eff>)/sqrt2
                entries.push((vec![l1, l2, l3, 0, eff], wcw));
                entries.push((vec![l1, l2, l3, 1, (eff + 1) % 2], wcw));
            }
        }
    }
    let expected_coded = formula_state(
        &[hd, hd, hd, 2, 2],
        &["a", "b", "c", "m1", "m2"],
        &entries,
    );
    out.push(check("eq26.coded", &coded_even, &expected_coded));

    // eq27: interception of a flying qubit at the eq25 stage collapses the
    // key onto the even or odd GHZ branch at weight 1/2 each.
    let d_half = hd / 2;
    for (id, outcome) in [("eq27.even", q), ("eq27.odd", (q + 1) % 2)] {
        let (rec, collapsed) = coded.project_z(&lbl("m1"), outcome)?;
        let mut c = check_value(&format!("{id}.weight"), rec.probability, 0.5);
        let parity_start = if outcome == q { 0usize } else { 1 };
        let wb = re(1.0 / (d_half as f64).sqrt());
        let entries: Vec<(Vec<usize>, Complex64)> = (parity_start..hd)
            .step_by(2)
            .map(|j| (vec![j, j, j, outcome, outcome], wb))
            .collect();
        let expected = formula_state(
            &[hd, hd, hd, 2, 2],
            &["a", "b", "c", "m1", "m2"],
            &entries,
        );
        let state_check = check(id, &collapsed, &expected);
        c.pass &= state_check.pass;
        c.max_deviation = c.max_deviation.max(state_check.max_deviation);
        c.id = id.to_string();
        out.push(c);
    }

    // Follow-up of eq27: the conjugate Fourier gates on the even branch give
    // support exactly on index sums divisible by d = D/2 (six deltas in the
    // printed form; confirmed by the oracle).
    let we = re((2.0 / hd as f64).sqrt());
    let even_entries: Vec<(Vec<usize>, Complex64)> = (0..hd)
        .step_by(2)
        .map(|j| (vec![j, j, j], we))
        .collect();
    let even_branch = formula_state(&[hd, hd, hd], &["a", "b", "c"], &even_entries);
    let h_conj = hadamard_gate(hd, true);
    let produced = even_branch
        .apply_single(&h_conj, &lbl("a"))?
        .apply_single(&h_conj, &lbl("b"))?
        .apply_single(&h_conj, &lbl("c"))?;
    let mut entries = Vec::new();
    let amp = re((2.0f64 / hd as f64).sqrt() * (d_half as f64) / (hd as f64).powf(1.5));
    for h1 in 0..hd {
        for h2 in 0..hd {
            for h3 in 0..hd {
                if (h1 + h2 + h3) % d_half == 0 {
                    entries.push((vec![h1, h2, h3], amp));
                }
            }
        }
    }
    let expected = formula_state(&[hd, hd, hd], &["a", "b", "c"], &entries);
    out.push(check("eq27.fourier", &produced, &expected));

    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_suite_passes() {
        let checks = run_all(&VerifyParams::default()).unwrap();
        assert!(!checks.is_empty());
        for c in &checks {
            assert!(c.pass, "{} failed with deviation {}", c.id, c.max_deviation);
        }
        assert!(checks.iter().any(|c| c.id == "eq16" && c.info.is_some()));
    }

    #[test]
    fn suite_passes_at_eight_dimensional_key() {
        let params = VerifyParams {
            hd_dim: 8,
            ..VerifyParams::default()
        };
        for c in run_all(&params).unwrap() {
            assert!(c.pass, "{} failed at D=8 ({})", c.id, c.max_deviation);
        }
    }

    #[test]
    fn filter_selects_single_equation() {
        let checks = run_filtered(&VerifyParams::default(), Some("eq7")).unwrap();
        assert_eq!(checks.len(), 1);
        assert_eq!(checks[0].id, "eq7");
    }
}
