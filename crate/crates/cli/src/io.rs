//! Text formats: point CSV input, the complex file, and OFF geometry.
//!
//! The complex file is line oriented so it diffs and sorts cleanly:
//!
//! ```text
//! #alpha v1
//! #ambient 2
//! #a1 0.25
//! 0 0 0
//! 1 0.25 0 1 0.5 0
//! ```
//!
//! Body lines are `k w v0 .. vk` with the ambient witness coordinates
//! appended when the file carries them, sorted by dimension, then weight,
//! then vertices. Floats are printed with the shortest representation that
//! round-trips, so rewriting a file reproduces it byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};

use alphax::{FilteredComplex, Simplex, WeightedPoints, WitnessMap};
use alphax::BarycentricEmbedding;

/// A complex plus the context needed to reuse it: ambient dimension,
/// the cutoff it was built at, and optional witness coordinates.
#[derive(Clone, Debug)]
pub struct ComplexFile {
    pub ambient: usize,
    pub cutoff: f64,
    pub complex: FilteredComplex,
    pub witness: Option<WitnessMap>,
}

fn parse_float(s: &str, what: &str, line: usize) -> Result<f64> {
    s.parse::<f64>()
        .with_context(|| format!("{what} line {line}: invalid number {s:?}"))
}

/// Read a point cloud from `points` (CSV, one point per line) and optional
/// per-point powers from `weights` (one value per line), attaching `cutoff`.
pub fn load_points(points: &Path, weights: Option<&Path>, cutoff: f64) -> Result<WeightedPoints> {
    let text = fs::read_to_string(points)
        .with_context(|| format!("cannot read points file {}", points.display()))?;
    let mut coords = Vec::new();
    let mut dim = 0usize;
    let mut count = 0usize;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if count == 0 {
            dim = fields.len();
        } else if fields.len() != dim {
            bail!(
                "points file line {}: expected {dim} fields, found {}",
                idx + 1,
                fields.len()
            );
        }
        for f in fields {
            coords.push(parse_float(f, "points file", idx + 1)?);
        }
        count += 1;
    }
    let power = match weights {
        None => vec![0.0; count],
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read weights file {}", path.display()))?;
            let mut power = Vec::new();
            for (idx, raw) in text.lines().enumerate() {
                let line = raw.trim();
                if line.is_empty() {
                    continue;
                }
                power.push(parse_float(line, "weights file", idx + 1)?);
            }
            if power.len() != count {
                bail!(
                    "weights file {} lists {} values for {count} points",
                    path.display(),
                    power.len()
                );
            }
            power
        }
    };
    WeightedPoints::new(coords, dim, power, cutoff).map_err(Into::into)
}

fn push_float(out: &mut String, v: f64) {
    // f64's Display is the shortest string that parses back exactly.
    write!(out, "{v}").unwrap();
}

/// Render a complex in the line format above. Witness coordinates are
/// included only when `witness` is `Some`.
pub fn format_complex(
    complex: &FilteredComplex,
    witness: Option<&WitnessMap>,
    ambient: usize,
    cutoff: f64,
) -> Result<String> {
    let mut out = String::new();
    out.push_str("#alpha v1\n");
    writeln!(out, "#ambient {ambient}").unwrap();
    let mut header = String::new();
    push_float(&mut header, cutoff);
    writeln!(out, "#a1 {header}").unwrap();

    for k in 0..complex.dimension_count() {
        let mut layer: Vec<(&Simplex, f64)> = complex.layer(k).collect();
        layer.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(b.0)));
        for (sigma, w) in layer {
            write!(out, "{k} ").unwrap();
            push_float(&mut out, w);
            for &v in sigma.vertices() {
                write!(out, " {v}").unwrap();
            }
            if let Some(map) = witness {
                let y = map
                    .get(sigma)
                    .with_context(|| format!("no witness stored for {:?}", sigma.vertices()))?;
                for &c in y {
                    out.push(' ');
                    push_float(&mut out, c);
                }
            }
            out.push('\n');
        }
    }
    Ok(out)
}

pub fn write_complex(path: &Path, file: &ComplexFile) -> Result<()> {
    let text = format_complex(
        &file.complex,
        file.witness.as_ref(),
        file.ambient,
        file.cutoff,
    )?;
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

/// Parse a complex file produced by [`format_complex`]. Witnesses are
/// either present on every body line or absent from all of them.
pub fn read_complex(path: &Path) -> Result<ComplexFile> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read complex file {}", path.display()))?;
    let mut lines = text.lines().enumerate();

    let mut header = |tag: &str| -> Result<String> {
        match lines.next() {
            Some((_, line)) if line.starts_with(tag) => Ok(line[tag.len()..].trim().to_string()),
            Some((idx, line)) => bail!(
                "complex file line {}: expected `{tag} ...`, found {line:?}",
                idx + 1
            ),
            None => bail!("complex file ends before `{tag}` header"),
        }
    };
    let version = header("#alpha")?;
    if version != "v1" {
        bail!("unsupported complex file version {version:?}");
    }
    let ambient: usize = header("#ambient")?
        .parse()
        .context("invalid #ambient header")?;
    if ambient == 0 {
        bail!("#ambient must be positive");
    }
    let cutoff = parse_float(&header("#a1")?, "complex file", 3)?;

    let mut complex = FilteredComplex::new();
    let mut witness: Option<WitnessMap> = None;
    let mut first_body = true;
    for (idx, raw) in lines {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let tok: Vec<&str> = line.split_whitespace().collect();
        if tok.len() < 2 {
            bail!("complex file line {lineno}: too few fields");
        }
        let k: usize = tok[0]
            .parse()
            .with_context(|| format!("complex file line {lineno}: invalid dimension {:?}", tok[0]))?;
        let w = parse_float(tok[1], "complex file", lineno)?;
        let bare = 2 + k + 1;
        let with_witness = bare + ambient;
        if first_body {
            witness = match tok.len() {
                l if l == with_witness => Some(WitnessMap::new(ambient)),
                l if l == bare => None,
                _ => bail!(
                    "complex file line {lineno}: expected {bare} or {with_witness} fields, found {}",
                    tok.len()
                ),
            };
            first_body = false;
        }
        let expected = if witness.is_some() { with_witness } else { bare };
        if tok.len() != expected {
            bail!(
                "complex file line {lineno}: expected {expected} fields, found {}",
                tok.len()
            );
        }
        let mut vertices = Vec::with_capacity(k + 1);
        for t in &tok[2..bare] {
            vertices.push(t.parse::<u32>().with_context(|| {
                format!("complex file line {lineno}: invalid vertex {t:?}")
            })?);
        }
        let sigma = Simplex::new(vertices)
            .with_context(|| format!("complex file line {lineno}: bad simplex"))?;
        if let Some(map) = witness.as_mut() {
            let mut y = Vec::with_capacity(ambient);
            for t in &tok[bare..] {
                y.push(parse_float(t, "complex file", lineno)?);
            }
            map.insert(sigma.clone(), y);
        }
        if complex.insert(sigma, w).is_some() {
            bail!("complex file line {lineno}: duplicate simplex");
        }
    }
    Ok(ComplexFile {
        ambient,
        cutoff,
        complex,
        witness,
    })
}

/// Write a barycentric embedding as OFF geometry. Ambient dimensions one
/// and two are padded with zero coordinates; above three there is nothing
/// a mesh viewer can do, so that is an error. Length-two flags become
/// segment faces, length-three flags triangles.
pub fn write_off(embedding: &BarycentricEmbedding, out: &mut impl Write) -> Result<()> {
    let m = if embedding.vertex_count() == 0 {
        0
    } else {
        embedding.coords()[0].len()
    };
    if m > 3 {
        bail!("geometry export supports at most 3 ambient dimensions, got {m}");
    }
    let segments = embedding.flags_of_length(2);
    let triangles = embedding.flags_of_length(3);
    writeln!(out, "OFF")?;
    writeln!(
        out,
        "{} {} 0",
        embedding.vertex_count(),
        segments.len() + triangles.len()
    )?;
    for y in embedding.coords() {
        let mut line = String::new();
        for t in 0..3 {
            if t > 0 {
                line.push(' ');
            }
            push_float(&mut line, y.get(t).copied().unwrap_or(0.0));
        }
        writeln!(out, "{line}")?;
    }
    for f in segments {
        writeln!(out, "2 {} {}", f[0], f[1])?;
    }
    for f in triangles {
        writeln!(out, "3 {} {} {}", f[0], f[1], f[2])?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alphax::{barycentric_embed, build_alpha, BuildParams};

    fn tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        let f = tmp("0,0\n1,0,3\n");
        let err = load_points(f.path(), None, 1.0).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");

        let f = tmp("0,0\n1,x\n");
        let err = load_points(f.path(), None, 1.0).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");

        let pts = tmp("0,0\n1,0\n");
        let ws = tmp("0.5\n");
        let err = load_points(pts.path(), Some(ws.path()), 1.0).unwrap_err();
        assert!(err.to_string().contains("2 points"), "{err}");
    }

    #[test]
    fn weighted_load_reads_powers() {
        let pts = tmp("0,0\n2,0\n");
        let ws = tmp("3\n1\n");
        let p = load_points(pts.path(), Some(ws.path()), 1.0).unwrap();
        assert_eq!(p.power(0), 3.0);
        assert_eq!(p.power(1), 1.0);
        assert_eq!(p.point(1), &[2.0, 0.0]);
    }

    #[test]
    fn complex_file_round_trips() {
        let pts = WeightedPoints::unweighted(vec![0.0, 0.0, 1.0, 0.0, 0.5, 0.8], 2, 0.4).unwrap();
        let (complex, witness) = build_alpha(&pts, &BuildParams::new(2)).unwrap();
        let file = ComplexFile {
            ambient: 2,
            cutoff: 0.4,
            complex,
            witness: Some(witness),
        };
        let text = format_complex(&file.complex, file.witness.as_ref(), 2, 0.4).unwrap();
        let stored = tmp(&text);
        let back = read_complex(stored.path()).unwrap();
        assert_eq!(back.ambient, file.ambient);
        assert_eq!(back.cutoff, file.cutoff);
        assert_eq!(back.complex, file.complex);
        assert_eq!(back.witness, file.witness);

        // Same round trip with witnesses stripped.
        let bare = format_complex(&file.complex, None, 2, 0.4).unwrap();
        let stored = tmp(&bare);
        let back = read_complex(stored.path()).unwrap();
        assert_eq!(back.complex, file.complex);
        assert!(back.witness.is_none());
    }

    #[test]
    fn malformed_complex_files_are_rejected() {
        for (text, needle) in [
            ("#alpha v2\n#ambient 2\n#a1 1\n", "version"),
            ("#alpha v1\n#ambient 2\n", "#a1"),
            ("#alpha v1\n#ambient 2\n#a1 1\n0\n", "too few"),
            ("#alpha v1\n#ambient 2\n#a1 1\n0 0\n", "expected 3 or 5 fields"),
            ("#alpha v1\n#ambient 2\n#a1 1\n0 0 0\n0 0 0 0.5 0.5\n", "fields"),
            ("#alpha v1\n#ambient 2\n#a1 1\n0 0 0\n0 0 0\n", "duplicate"),
            ("#alpha v1\n#ambient 2\n#a1 1\n1 0 3 3\n", "bad simplex"),
        ] {
            let f = tmp(text);
            let err = read_complex(f.path()).unwrap_err();
            assert!(format!("{err:#}").contains(needle), "{text:?} -> {err:#}");
        }
    }

    #[test]
    fn off_output_pads_to_three_coordinates() {
        let pts = WeightedPoints::unweighted(vec![0.0, 0.0, 1.0, 0.0], 2, 0.3).unwrap();
        let (complex, witness) = build_alpha(&pts, &BuildParams::new(1)).unwrap();
        let emb = barycentric_embed(&complex, &witness, 2).unwrap();
        let mut buf = Vec::new();
        write_off(&emb, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("OFF"));
        assert_eq!(lines.next(), Some("3 2 0"));
        assert!(text.lines().skip(2).take(3).all(|l| l.split(' ').count() == 3));
        assert!(text.contains("0.5 0 0"));
        assert_eq!(text.lines().filter(|l| l.starts_with("2 ")).count(), 2);
    }
}
