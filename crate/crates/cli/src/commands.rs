use crate::input::Problem;
use crate::svg::Plot;
use crate::{Common, Format, Output};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;
use so_orbit::boundary::{
    argmax_frames, convexity_check, counterexample_report, gamma_sample, gamma_verify, max_trace, support_boundary,
    thompson_membership, CounterexampleConfig, CounterexampleKind, DiagonalHullQuery, GammaTransport,
};
use so_orbit::ellipsoid::{degenerate_u0_rows, degenerate_uv, ellipse_eu_rows, ellipsoid_euv, membership};
use so_orbit::io::{serialize_matrix, MatrixJson};
use so_orbit::orbit::sample_image;
use so_orbit::star::{certify_scaled_point, star_check as run_star_check, star_check_joint};
use so_orbit::{
    JointLinearMap, JointOrbitSpec, LinearMapSpec, Matrix, OrbitError, OrbitSpec, Result, Tolerances,
};
use std::fmt::Write as _;

fn problem(c: &Common) -> Result<Problem> {
    let path = c.input.as_ref().ok_or_else(|| OrbitError::Parse("--input <path> is required".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| OrbitError::Parse(format!("cannot read {}: {e}", path.display())))?;
    Problem::parse(&text)
}

fn format(c: &Common, allowed: &[Format], default: Format) -> Result<Format> {
    let f = c.format.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(OrbitError::Unsupported(format!("format {f:?} is not available for this command").to_lowercase()))
    }
}

fn envelope<T: Serialize>(command: &str, c: &Common, result: &T) -> Result<String> {
    let doc = json!({
        "command": command,
        "seed": c.seed,
        "tolerances": Tolerances::global(),
        "result": result,
    });
    let mut s = serde_json::to_string_pretty(&doc).map_err(|e| OrbitError::Parse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn json_only<T: Serialize>(command: &str, c: &Common, result: &T, pass: bool) -> Result<Output> {
    format(c, &[Format::Json], Format::Json)?;
    Ok(Output { text: envelope(command, c, result)?, pass })
}

pub fn emit(c: &Common, text: &str) -> std::io::Result<()> {
    match &c.out {
        Some(path) => std::fs::write(path, text),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}

fn two_maps(doc: &Problem) -> Result<(Matrix, Matrix)> {
    let ps = doc.ps_at_least(2)?;
    Ok((ps[0].clone(), ps[1].clone()))
}

fn rows(doc: &Problem) -> (usize, usize) {
    doc.rows.map(|[i, j]| (i, j)).unwrap_or((0, 1))
}

pub fn boundary(c: &Common) -> Result<Output> {
    let doc = problem(c)?;
    let (a, (p, q)) = (doc.a()?, two_maps(&doc)?);
    let b = support_boundary(&p, &q, &a, c.grid)?;
    let text = match format(c, &[Format::Json, Format::Csv, Format::Svg], Format::Json)? {
        Format::Json => envelope("boundary", c, &b)?,
        Format::Csv => {
            let mut s = String::from("theta,r,touch_x,touch_y\n");
            for x in &b.samples {
                let _ = writeln!(s, "{},{},{},{}", x.angle, x.value, x.touching[0], x.touching[1]);
            }
            s
        }
        Format::Svg => {
            let cloud = match c.samples {
                Some(k) if k > 0 => {
                    let l = LinearMapSpec::new(vec![p.clone(), q.clone()])?;
                    sample_image(&l, &OrbitSpec::new(a.clone(), doc.group())?, k, c.seed)?.planar()
                }
                _ => Vec::new(),
            };
            let mut extent = b.region.vertices.clone();
            extent.extend(&cloud);
            let mut plot = Plot::new(&extent);
            plot.polygon(&b.region.vertices, "black", "#dde8f5");
            plot.dots(&cloud, "#c03030", 0.8);
            plot.dots(&b.samples.iter().map(|s| s.touching).collect::<Vec<_>>(), "#204080", 1.5);
            plot.finish("support region")
        }
    };
    Ok(Output { text, pass: true })
}

pub fn star_check(c: &Common, targets: usize) -> Result<Output> {
    let doc = problem(c)?;
    let l = LinearMapSpec::new(doc.ps()?)?;
    let orbit = OrbitSpec::new(doc.a()?, doc.group())?;
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let report = run_star_check(&l, &orbit, targets, &c.alpha, &mut rng)?.without_witnesses();
    let pass = report.passed();
    json_only("star-check", c, &report, pass)
}

pub fn certify(c: &Common) -> Result<Output> {
    let doc = problem(c)?;
    let l = LinearMapSpec::new(doc.ps()?)?;
    let (a, u, v) = (doc.a()?, doc.rotation("U")?, doc.rotation("V")?);
    let tol = Tolerances::global();
    let mut out = Vec::new();
    let mut pass = true;
    for &alpha in &c.alpha {
        let cert = certify_scaled_point(&l, &a, &u, &v, alpha)?;
        pass &= cert.accepted(&tol);
        out.push(json!({ "alpha": alpha, "accepted": cert.accepted(&tol), "certificate": cert }));
    }
    json_only("certify", c, &out, pass)
}

pub fn ellipse(c: &Common) -> Result<Output> {
    let doc = problem(c)?;
    let ps = doc.ps()?;
    let u = doc.rotation("U")?;
    let curve = if doc.v.is_some() {
        ellipsoid_euv(&ps, &u, &doc.rotation("V")?)?
    } else {
        let (p, q) = two_maps(&doc)?;
        ellipse_eu_rows(&p, &q, &u, rows(&doc))?
    };
    let member = match &doc.y {
        Some(y) => Some(membership(&curve, &nalgebra::DVector::from_column_slice(y))?),
        None => None,
    };
    let result = json!({
        "curve": curve,
        "singular_values": curve.singular_values(),
        "degenerate": curve.is_degenerate(&Tolerances::global()),
        "membership": member,
    });
    json_only("ellipse", c, &result, true)
}

pub fn degenerate(c: &Common) -> Result<Output> {
    let doc = problem(c)?;
    let ps = doc.ps_at_least(2)?;
    let (result, pass) = if ps.len() == 2 {
        let rows = rows(&doc);
        let con = degenerate_u0_rows(&ps[0], rows)?;
        let curve = ellipse_eu_rows(&ps[0], &ps[1], &con.u0, rows)?;
        let det = curve.shape.determinant();
        let scale = 1.0 + ps[0].row(rows.0).norm() + ps[0].row(rows.1).norm();
        let pass = con.residual <= 1e-10 * scale;
        (json!({ "construction": con, "curve": curve, "shape_determinant": det }), pass)
    } else {
        let (u, v) = degenerate_uv(&ps[0])?;
        let curve = ellipsoid_euv(&ps, &u, &v)?;
        let first_row = curve.shape.row(0).norm();
        let pass = first_row <= 1e-10 * (1.0 + ps[0].norm());
        (json!({ "U": u, "V": v, "curve": curve, "first_row_norm": first_row }), pass)
    };
    json_only("degenerate", c, &result, pass)
}

#[derive(Serialize)]
struct MaxTraceResult {
    value: f64,
    achieved: f64,
    #[serde(rename = "U", serialize_with = "serialize_matrix")]
    u: Matrix,
    #[serde(rename = "V", serialize_with = "serialize_matrix")]
    v: Matrix,
}

pub fn maxtrace(c: &Common) -> Result<Output> {
    let doc = problem(c)?;
    let (a, p) = (doc.a()?, doc.ps()?.remove(0));
    let value = max_trace(&p, &a)?;
    let (u, v) = argmax_frames(&p, &a)?;
    let achieved = (&p * u.matrix() * &a * v.matrix()).trace();
    let pass = (achieved - value).abs() <= 1e-10 * (1.0 + value.abs());
    let r = MaxTraceResult { value, achieved, u: u.into_matrix(), v: v.into_matrix() };
    json_only("maxtrace", c, &r, pass)
}

pub fn gamma(c: &Common) -> Result<Output> {
    let doc = problem(c)?;
    let (a, p) = (doc.a()?, doc.ps()?.remove(0));
    let t = GammaTransport::new(&p, &a)?;
    let s = &t.structure;
    let (pd, ad) = (s.p_matrix(), s.a_matrix());
    let r = max_trace(&p, &a)?;
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let mut pass = true;
    let samples: Vec<_> = gamma_sample(s, c.samples.unwrap_or(10), &mut rng)
        .into_iter()
        .map(|b0| -> Result<_> {
            let report = gamma_verify(&b0, &pd, &ad, s)?;
            let b = t.apply(&b0);
            let gap = r - (&p * &b).trace();
            pass &= report.pass && gap.abs() <= Tolerances::global().certificate * (1.0 + r.abs());
            Ok(json!({ "B": MatrixJson::from(&b), "trace_gap": gap, "diagonal_report": report }))
        })
        .collect::<Result<_>>()?;
    let result = json!({ "structure": s, "max_trace": r, "samples": samples });
    json_only("gamma", c, &result, pass)
}

pub fn thompson(c: &Common) -> Result<Output> {
    let doc = problem(c)?;
    let d = doc.d.clone().ok_or_else(|| OrbitError::Parse("input document has no \"d\" field".into()))?;
    let s = doc.s.clone().ok_or_else(|| OrbitError::Parse("input document has no \"s\" field".into()))?;
    let q = DiagonalHullQuery::new(d, s, doc.det_sign.unwrap_or(1))?;
    let r = thompson_membership(&q)?;
    json_only("thompson", c, &json!({ "query": q, "membership": r }), true)
}

pub fn counterexample(c: &Common, kind: CounterexampleKind, n: usize, m: usize, ell: usize, starts: usize) -> Result<Output> {
    let config = CounterexampleConfig { starts, ..Default::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let r = counterexample_report(kind, n, m, ell, config, &mut rng)?;
    let pass = r.pass;
    json_only("counterexample", c, &r, pass)
}

pub fn sample(c: &Common) -> Result<Output> {
    let doc = problem(c)?;
    let l = LinearMapSpec::new(doc.ps()?)?;
    let orbit = OrbitSpec::new(doc.a()?, doc.group())?;
    let cloud = sample_image(&l, &orbit, c.samples.unwrap_or(1000), c.seed)?;
    let text = match format(c, &[Format::Json, Format::Csv, Format::Svg], Format::Csv)? {
        Format::Csv => so_orbit::io::point_cloud_csv(&cloud),
        Format::Json => {
            let pts: Vec<&[f64]> = cloud.points.iter().map(|p| p.as_slice()).collect();
            envelope("sample", c, &json!({ "dim": cloud.dim, "points": pts }))?
        }
        Format::Svg => {
            if cloud.dim != 2 {
                return Err(OrbitError::Unsupported("svg output needs a planar image (two maps)".into()));
            }
            let pts = cloud.planar();
            let mut plot = Plot::new(&pts);
            plot.dots(&pts, "#c03030", 0.8);
            plot.finish("sampled image")
        }
    };
    Ok(Output { text, pass: true })
}

pub fn convexity(c: &Common) -> Result<Output> {
    let doc = problem(c)?;
    let (a, (p, q)) = (doc.a()?, two_maps(&doc)?);
    let r = convexity_check(&p, &q, &a, c.samples.unwrap_or(100_000), c.seed, c.grid)?;
    let pass = r.violations == 0 && r.drift.as_ref().is_none_or(|d| d.pass);
    json_only("convexity", c, &r, pass)
}

pub fn joint(c: &Common, targets: usize) -> Result<Output> {
    let doc = problem(c)?;
    let j = doc.joint.as_ref().ok_or_else(|| OrbitError::Parse("input document has no \"joint\" field".into()))?;
    let rows: Vec<Vec<Matrix>> =
        j.p.iter().map(|r| r.iter().map(MatrixJson::to_matrix).collect::<Result<_>>()).collect::<Result<_>>()?;
    let mats: Vec<Matrix> = j.a.iter().map(MatrixJson::to_matrix).collect::<Result<_>>()?;
    let map = JointLinearMap::new(rows)?;
    let spec = JointOrbitSpec::new(mats, j.kind, doc.group())?;
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let report = star_check_joint(&map, &spec, targets, &c.alpha, &mut rng)?.without_witnesses();
    let pass = report.passed();
    json_only("joint", c, &report, pass)
}
