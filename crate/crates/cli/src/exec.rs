//! Runs scenario commands against the core.

use choquet_core::error::Error;
use choquet_core::geometry::ExtremeSet;
use choquet_core::lp::{self, Constraints, LinearProgram, LpStatus};
use choquet_core::measures::disintegrate;
use choquet_core::ordering::{self, PrecD, INTEGRAL_TOL};
use choquet_core::suites::{run_suite, SuiteConfig, SuiteReport};
use choquet_core::{random, transfer, AtomicMeasure, Space, VectorMeasure};
use serde_json::{json, Value};

use crate::report::{Entry, Status};
use crate::scenario::{Command, Rel, Scenario, Sense};

/// Run-wide settings from the command line.
#[derive(Debug, Clone)]
pub struct Settings {
    pub seed: u64,
    pub trials: Option<usize>,
    pub cap: usize,
}

type Outcome = Result<(Status, String, Value), Error>;

pub fn run(scenario: &Scenario, settings: &Settings) -> Vec<Entry> {
    scenario
        .commands
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let (status, summary, result) = match execute(scenario, settings, i, c) {
                Ok(r) => r,
                Err(e) => (
                    Status::Error,
                    e.to_string(),
                    json!({ "error": e.to_string() }),
                ),
            };
            let anchor = match (&result, c) {
                (Value::Object(m), Command::Verify { .. }) if m.contains_key("anchor") => {
                    m["anchor"].as_str().unwrap_or_default().to_string()
                }
                _ => anchor(c).to_string(),
            };
            Entry {
                index: i,
                op: c.name().to_string(),
                anchor,
                status,
                summary,
                result,
            }
        })
        .collect()
}

fn anchor(c: &Command) -> &'static str {
    use Command::*;
    match c {
        PrimalNorm { .. } => "primal norm: Minkowski gauge of the unit ball",
        DualNorm { .. } => "dual norm: support function of the unit ball",
        ExtremePoints => "extreme points of the dual unit ball",
        Facets => "facets of the primal ball, normals are dual ball vertices",
        MinimalFace { .. } => "smallest face of the dual ball containing a sphere point",
        IsStrictlyConvex => "dual norm strictly convex: every sphere point is extreme",
        IsSimplexoid => "simplexoid: every proper face of the dual ball is a simplex",
        Lp { .. } => "linear program solved by the simplex engine",
        TotalVariation { .. } => "total variation norm of a vector measure",
        Pair { .. } => "pairing of a vector measure with a continuous selection",
        Mass { .. } => "total mass of a positive measure",
        Disintegrate { .. } => "disintegration over K: base masses and fiber probabilities",
        Barycenter { .. } => "barycenter of a probability on the dual ball",
        Hustad { .. } => "Hustad map: atomic measure to vector measure",
        Transfer { .. } => "transfer K: Hustad map inverts K and K is carried by the sphere",
        Tilde { .. } => "tilde: collapse every fiber to its normalized barycenter",
        Density { .. } => "density h of the Hustad image with respect to the base mass",
        InN { .. } => "membership in N(mu): Hustad image mu and mass equal to the norm",
        EvalPf { .. } => "p_f(mu) as the integral of f against K mu",
        IntegrateD { .. } => "integral of a D-function against an atomic measure",
        ChoquetLeq { .. } => "Choquet order decided by a dilation, refuted by a convex function",
        IsMaximal { .. } => "Choquet maximality: no proper dilation exists",
        Maximalize { .. } => "a maximal dilation with its transport matrix",
        Envelope { .. } => "upper envelope of a convex function on the dual ball",
        Mokobodzki { .. } => "Mokobodzki test: maximal iff f equals its envelope almost everywhere",
        Precd { .. } => "order <_D on N(mu): fiberwise Choquet order reversed",
        IsMinimal { .. } => "<_D-minimal members of N(mu) have maximal fibers",
        Minimalize { .. } => "a <_D-minimal member below a given one",
        EnumerateMinimal { .. } => "extreme <_D-minimal members of N(mu)",
        Sublinear { .. } => "on the sphere, the order is decided by sublinear functions",
        PrecB { .. } => "order on vector measures through their transfers",
        Verify { .. } => "verification suite",
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("core types serialize")
}

fn execute(sc: &Scenario, st: &Settings, index: usize, c: &Command) -> Outcome {
    let sp = &sc.space;
    let vm = |n: &str| &sc.vector_measures[n];
    let am = |n: &str| &sc.atomic_measures[n];
    let pr = |n: &str| &sc.probabilities[n];
    let ok = |summary: String, v: Value| Ok((Status::Ok, summary, v));
    match c {
        Command::PrimalNorm { x } => {
            let n = sp.primal_norm(x)?;
            ok(format!("{n}"), json!({ "value": n }))
        }
        Command::DualNorm { xstar } => {
            let n = sp.dual_norm(xstar)?;
            ok(format!("{n}"), json!({ "value": n }))
        }
        Command::ExtremePoints => match sp.dual_ball_extreme_points() {
            ExtremeSet::Vertices(v) => {
                ok(format!("{} vertices", v.len()), json!({ "vertices": v }))
            }
            ExtremeSet::WholeSphere => ok("whole sphere".into(), json!({ "whole_sphere": true })),
        },
        Command::Facets => {
            let f = sp.facets()?;
            ok(
                format!("{} facets", f.len()),
                json!({ "facets": to_json(&f) }),
            )
        }
        Command::MinimalFace { xstar } => {
            let f = sp.minimal_face(xstar)?;
            ok(
                format!(
                    "{} points, affine dimension {}",
                    f.points.len(),
                    f.affine_dim
                ),
                to_json(&f),
            )
        }
        Command::IsStrictlyConvex => {
            let b = sp.is_strictly_convex_dual();
            ok(format!("{b}"), json!({ "value": b }))
        }
        Command::IsSimplexoid => {
            let b = sp.is_simplexoid_dual();
            ok(format!("{b}"), json!({ "value": b }))
        }
        Command::Lp {
            sense,
            objective,
            constraints,
            bounds,
        } => {
            let mut cons = Constraints::new(objective.len());
            for r in constraints {
                match r.rel {
                    Rel::Le => cons.add_le(r.row.clone(), r.rhs),
                    Rel::Ge => cons.add_ge(r.row.clone(), r.rhs),
                    Rel::Eq => cons.add_eq(r.row.clone(), r.rhs),
                };
            }
            for b in bounds {
                cons.bounds(b.var, b.lower, b.upper);
            }
            let prog = match sense {
                Sense::Max => LinearProgram::maximize(objective.clone(), cons),
                Sense::Min => LinearProgram::minimize(objective.clone(), cons),
            };
            let out = lp::solve(&prog)?;
            let status = match out.status {
                LpStatus::Optimal => "optimal",
                LpStatus::Infeasible => "infeasible",
                LpStatus::Unbounded => "unbounded",
            };
            let summary = match out.value {
                Some(v) => format!("{status}, value {v}"),
                None => status.to_string(),
            };
            ok(
                summary,
                json!({ "status": status, "value": out.value, "solution": out.solution }),
            )
        }
        Command::TotalVariation { measure } => {
            let v = vm(measure).total_variation(sp)?;
            ok(format!("{v}"), json!({ "value": v }))
        }
        Command::Pair { measure, g } => {
            let v = vm(measure).pair(g)?;
            ok(format!("{v}"), json!({ "value": v }))
        }
        Command::Mass { measure } => {
            let v = am(measure).mass()?;
            ok(format!("{v}"), json!({ "value": v }))
        }
        Command::Disintegrate { measure } => {
            let k = disintegrate(am(measure))?;
            ok(format!("{} fibers", k.sigma.len()), to_json(&k))
        }
        Command::Barycenter { probability } => {
            let b = pr(probability).barycenter();
            ok(format!("{b:?}"), json!({ "value": b }))
        }
        Command::Hustad { measure } => {
            let m = transfer::hustad(am(measure));
            ok(format!("{} labels", m.entries.len()), to_json(&m))
        }
        Command::Transfer { measure } => transfer_op(sp, vm(measure)),
        Command::Tilde { measure } => {
            let m = transfer::tilde(am(measure), sp)?;
            ok(format!("{} atoms", m.len()), to_json(&m))
        }
        Command::Density { measure } => {
            let d = transfer::density_h(am(measure))?;
            ok(format!("{} labels", d.h.len()), to_json(&d))
        }
        Command::InN { measure, mu } => {
            let defect = transfer::membership_defect(am(measure), vm(mu), sp);
            let b = defect.is_none();
            let summary = match &defect {
                None => "true".to_string(),
                Some(why) => format!("false: {why}"),
            };
            ok(summary, json!({ "value": b, "defect": defect }))
        }
        Command::EvalPf { dfunction, measure } => {
            let v = transfer::eval_pf(&sc.dfunctions[dfunction], vm(measure), sp)?;
            ok(format!("{v}"), json!({ "value": v }))
        }
        Command::IntegrateD { dfunction, measure } => {
            let v = sc.dfunctions[dfunction].integrate(am(measure))?;
            ok(format!("{v}"), json!({ "value": v }))
        }
        Command::ChoquetLeq { p, q } => choquet_op(sp, pr(p), pr(q)),
        Command::IsMaximal { probability } => {
            let b = ordering::is_maximal(pr(probability), sp);
            ok(format!("{b}"), json!({ "value": b }))
        }
        Command::Maximalize { probability } => {
            let (m, w) = ordering::maximalize_with_witness(pr(probability), sp)?;
            let residual = w.residual();
            let maximal = ordering::is_maximal(&m, sp);
            let pass = maximal && residual <= INTEGRAL_TOL;
            Ok((
                verdict(pass),
                format!(
                    "{} atoms, maximal {maximal}, witness residual {residual:.2e}",
                    m.len()
                ),
                json!({ "measure": to_json(&m), "witness": to_json(&w), "residual": residual, "maximal": maximal }),
            ))
        }
        Command::Envelope { f, at } => {
            let v = ordering::upper_envelope_at(f, at, sp)?;
            let exact = sp.is_polytope();
            ok(
                format!("{v}{}", if exact { "" } else { " (lower bound)" }),
                json!({ "value": v, "f_at": f.eval(at), "exact": exact }),
            )
        }
        Command::Mokobodzki {
            probability,
            samples,
        } => {
            let p = pr(probability);
            let mut rng = random::trial_rng(st.seed, index as u64);
            let moko = ordering::mokobodzki_maximal(p, sp, *samples, &mut rng)?;
            let lp_says = ordering::is_maximal(p, sp);
            Ok((
                verdict(moko == lp_says),
                format!("envelope test {moko}, dilation LP {lp_says}"),
                json!({ "value": moko, "lp_maximal": lp_says, "samples": samples }),
            ))
        }
        Command::Precd { nu1, nu2 } => precd_op(sp, am(nu1), am(nu2)),
        Command::IsMinimal { measure, mu } => {
            let b = ordering::is_minimal(am(measure), vm(mu), sp)?;
            ok(format!("{b}"), json!({ "value": b }))
        }
        Command::Minimalize { measure, mu } => {
            let nu = am(measure);
            let m = ordering::minimalize(nu, vm(mu), sp)?;
            let minimal = ordering::is_minimal(&m, vm(mu), sp)?;
            let below = ordering::precd(&m, nu, sp)?.holds();
            Ok((
                verdict(minimal && below),
                format!("{} atoms, minimal {minimal}, below input {below}", m.len()),
                json!({ "measure": to_json(&m), "minimal": minimal, "below_input": below }),
            ))
        }
        Command::EnumerateMinimal { mu } => {
            let e = ordering::enumerate_minimal(vm(mu), sp, st.cap)?;
            let n = e.measures.len();
            let summary = format!(
                "{n} minimal measure{}{}{}",
                if n == 1 { "" } else { "s" },
                if n == 1 { " (unique)" } else { "" },
                if e.truncated {
                    ", truncated at cap"
                } else {
                    ""
                }
            );
            ok(summary, to_json(&e))
        }
        Command::Sublinear { p, q, samples } => {
            let (p, q) = (pr(p), pr(q));
            let mut rng = random::trial_rng(st.seed, index as u64);
            match ordering::sublinear_order_test(p, q, sp, *samples, &mut rng) {
                Ok(b) => {
                    let lp_says = ordering::choquet_leq(p, q, sp)?.holds;
                    Ok((
                        verdict(b == lp_says),
                        format!("sublinear test {b}, dilation LP {lp_says}"),
                        json!({ "value": b, "lp_holds": lp_says, "samples": samples }),
                    ))
                }
                Err(e @ (Error::BarycenterMismatch | Error::NotOnSphere { .. })) => Ok((
                    Status::Skipped,
                    format!("hypothesis not met: {e}"),
                    json!({ "skipped": e.to_string() }),
                )),
                Err(e) => Err(e),
            }
        }
        Command::PrecB { mu1, mu2 } => {
            let b = ordering::prec_b(vm(mu1), vm(mu2), sp);
            ok(format!("{b}"), json!({ "value": b }))
        }
        Command::Verify {
            suite,
            trials,
            seed,
        } => {
            let cfg = SuiteConfig {
                seed: seed.unwrap_or(st.seed),
                trials: trials.or(st.trials),
                space: Some(sp.clone()),
                cap: st.cap,
            };
            Ok(suite_outcome(&run_suite(suite, &cfg)?))
        }
    }
}

fn verdict(pass: bool) -> Status {
    if pass {
        Status::Pass
    } else {
        Status::Fail
    }
}

pub fn suite_outcome(r: &SuiteReport) -> (Status, String, Value) {
    let status = if r.skipped {
        Status::Skipped
    } else {
        verdict(r.ok())
    };
    let mut summary = format!(
        "{}/{} trials passed, max violation {:.2e}, tolerance {:.0e}",
        r.passed, r.trials, r.max_violation, r.tolerance
    );
    if !r.notes.is_empty() {
        summary.push_str("; ");
        summary.push_str(&r.notes.join("; "));
    }
    (status, summary, to_json(r))
}

fn transfer_op(sp: &Space, mu: &VectorMeasure) -> Outcome {
    let k = transfer::transfer_k(mu, sp)?;
    let tv = mu.total_variation(sp)?;
    let scale = tv.max(1.0);
    let roundtrip = transfer::hustad(&k).max_abs_diff(mu);
    let mass_gap = (k.mass()? - tv).abs();
    let off_sphere = k
        .atoms()
        .iter()
        .map(|a| sp.dual_norm(&a.xstar).map(|n| (n - 1.0).abs()))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let tol = sp.tol() * scale;
    let pass = roundtrip <= tol && mass_gap <= tol && off_sphere <= sp.tol();
    Ok((
        verdict(pass),
        format!(
            "{} atoms; roundtrip residual {roundtrip:.2e}, mass gap {mass_gap:.2e}, sphere gap {off_sphere:.2e}",
            k.len()
        ),
        json!({
            "k_mu": to_json(&k),
            "roundtrip_residual": roundtrip,
            "mass_gap": mass_gap,
            "sphere_gap": off_sphere,
            "tolerance": tol,
        }),
    ))
}

fn choquet_op(
    sp: &Space,
    p: &choquet_core::ProbabilityAtoms,
    q: &choquet_core::ProbabilityAtoms,
) -> Outcome {
    let v = ordering::choquet_leq(p, q, sp)?;
    if v.holds {
        let w = v
            .witness
            .as_ref()
            .expect("a holding verdict carries a witness");
        let residual = w.residual();
        return Ok((
            verdict(residual <= INTEGRAL_TOL),
            format!("holds; dilation witness residual {residual:.2e}"),
            json!({ "holds": true, "witness": to_json(w), "residual": residual }),
        ));
    }
    if !v.barycenters_match {
        return Ok((
            Status::Ok,
            "does not hold: barycenters differ".into(),
            json!({ "holds": false, "barycenters_match": false, "barycenters": [p.barycenter(), q.barycenter()] }),
        ));
    }
    match ordering::choquet_falsifier(p, q)? {
        Some(f) => {
            let gap = f.integrate(p) - f.integrate(q);
            Ok((
                verdict(gap > 0.0),
                format!("does not hold; convex falsifier separates by {gap:.3e}"),
                json!({ "holds": false, "barycenters_match": true, "falsifier": to_json(&f), "gap": gap }),
            ))
        }
        None => Ok((
            Status::Fail,
            "does not hold, but no falsifier was found".into(),
            json!({ "holds": false, "barycenters_match": true }),
        )),
    }
}

fn precd_op(sp: &Space, nu1: &AtomicMeasure, nu2: &AtomicMeasure) -> Outcome {
    let v = ordering::precd(nu1, nu2, sp)?;
    match &v {
        PrecD::Holds => {
            let (k1, k2) = (disintegrate(nu1)?, disintegrate(nu2)?);
            let mut witnesses = serde_json::Map::new();
            let mut worst: f64 = 0.0;
            for (t, f1) in &k1.kernels {
                let c = ordering::choquet_leq(&k2.kernels[t], f1, sp)?;
                if let Some(w) = c.witness {
                    worst = worst.max(w.residual());
                    witnesses.insert(t.clone(), to_json(&w));
                }
            }
            Ok((
                verdict(worst <= INTEGRAL_TOL),
                format!("holds; fiber witnesses residual {worst:.2e}"),
                json!({ "verdict": to_json(&v), "fiber_witnesses": witnesses, "residual": worst }),
            ))
        }
        PrecD::HustadMismatch { label } => Ok((
            Status::Ok,
            format!("does not hold: Hustad images differ at {label}"),
            json!({ "verdict": to_json(&v) }),
        )),
        PrecD::FiberNotDominated { label } => {
            let f = ordering::precd_falsifier(nu1, nu2, sp)?;
            match f {
                Some(f) => {
                    let gap = f.integrate(nu1)? - f.integrate(nu2)?;
                    Ok((
                        verdict(gap > 0.0),
                        format!("does not hold at {label}; D-function separates by {gap:.3e}"),
                        json!({ "verdict": to_json(&v), "falsifier": to_json(&f), "gap": gap }),
                    ))
                }
                None => Ok((
                    Status::Fail,
                    format!("does not hold at {label}, but no falsifier was found"),
                    json!({ "verdict": to_json(&v) }),
                )),
            }
        }
    }
}
