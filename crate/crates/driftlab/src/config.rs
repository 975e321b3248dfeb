//! Textual expression grammar for kernels and measures.
//!
//! Kernels: `laplace(tau=..)`, `gaussian(sigma=..)`, `matern(nu=..,ell=..)`,
//! each accepting an optional `dim=..` that overrides the caller's default.
//!
//! Measures: `dirac(x=..)`, `atoms(file=..)` (CSV, one atom per row, last
//! column the weight), `powerlaw(m=..,dim=..)`, `tilt(m=..,n=..)`, and the
//! recursive `satellite(base=<measure>,eps=..,z=..)`. Vector values are
//! written `[a,b,...]`; a bare number is a 1-vector. Density-backed
//! expressions (`powerlaw`, `tilt`) realize through radial discretization,
//! so realization takes the grid parameters.

use std::path::{Path, PathBuf};

use crate::kernels::KernelSpec;
use crate::measures::{
    discretize_density, make_discrete, satellite, tilt_density, Density, DiscreteMeasure,
    PowerLawDensity, RadialGrid,
};
use crate::{Error, Result};

/// Radial grid parameters used when a measure expression names a density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscretizationParams {
    pub r_max: f64,
    pub cells: usize,
    pub sectors: usize,
}

impl Default for DiscretizationParams {
    fn default() -> Self {
        Self {
            r_max: 40.0,
            cells: 400,
            sectors: 64,
        }
    }
}

impl DiscretizationParams {
    fn grid(&self) -> Result<RadialGrid> {
        RadialGrid::with_sectors(self.r_max, self.cells, self.sectors)
    }
}

/// Parsed measure expression, realizable against a dimension and a grid.
#[derive(Debug, Clone, PartialEq)]
pub enum MeasureExpr {
    Dirac {
        x: Vec<f64>,
    },
    Atoms {
        file: PathBuf,
    },
    PowerLaw {
        m: Option<f64>,
        dim: Option<usize>,
    },
    Tilt {
        m: Option<f64>,
        n: u32,
    },
    Satellite {
        base: Box<MeasureExpr>,
        eps: f64,
        z: Vec<f64>,
    },
}

impl MeasureExpr {
    /// Builds the concrete measure. Density-backed expressions are
    /// discretized on the given radial grid and normalized to probability
    /// mass; `dirac`/`atoms` must already match the requested dimension.
    pub fn realize(&self, dim: usize, disc: &DiscretizationParams) -> Result<DiscreteMeasure> {
        match self {
            MeasureExpr::Dirac { x } => {
                if x.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: x.len(),
                    });
                }
                DiscreteMeasure::dirac(x)
            }
            MeasureExpr::Atoms { file } => {
                let m = load_atoms_csv(file)?;
                if m.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: m.dim(),
                    });
                }
                Ok(m)
            }
            MeasureExpr::PowerLaw { m, dim: d_expr } => {
                let d = d_expr.unwrap_or(dim);
                if d != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: d,
                    });
                }
                let m = m.unwrap_or(d as f64 + 2.0);
                let density = PowerLawDensity::new(m, d)?;
                let (cloud, _) =
                    discretize_density(&Density::PowerLaw(density), &disc.grid()?, true)?;
                Ok(cloud)
            }
            MeasureExpr::Tilt { m, n } => {
                let m = m.unwrap_or(dim as f64 + 2.0);
                let base = PowerLawDensity::new(m, dim)?;
                let density = tilt_density(base, *n)?;
                let (cloud, _) =
                    discretize_density(&Density::Tilted(density), &disc.grid()?, true)?;
                Ok(cloud)
            }
            MeasureExpr::Satellite { base, eps, z } => {
                if z.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: z.len(),
                    });
                }
                let b = base.realize(dim, disc)?;
                satellite(&b, *eps, z)
            }
        }
    }
}

/// Atom cloud from a CSV file: one atom per row, last column the weight.
/// Every row must be numeric with the same column count; weights are taken
/// as written (not renormalized).
pub fn load_atoms_csv(path: &Path) -> Result<DiscreteMeasure> {
    let text = std::fs::read_to_string(path)?;
    let mut atoms = Vec::new();
    let mut weights = Vec::new();
    let mut width = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields = line
            .split(',')
            .map(|f| {
                f.trim().parse::<f64>().map_err(|_| Error::Parse {
                    context: format!("{}:{}", path.display(), lineno + 1),
                    message: format!("not a number: `{}`", f.trim()),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if fields.len() < 2 {
            return Err(Error::Parse {
                context: format!("{}:{}", path.display(), lineno + 1),
                message: "need at least one coordinate column and a weight column".to_string(),
            });
        }
        match width {
            None => width = Some(fields.len()),
            Some(w) if w != fields.len() => {
                return Err(Error::Parse {
                    context: format!("{}:{}", path.display(), lineno + 1),
                    message: format!("row has {} columns, expected {w}", fields.len()),
                });
            }
            _ => {}
        }
        let (coords, w) = fields.split_at(fields.len() - 1);
        atoms.push(coords.to_vec());
        weights.push(w[0]);
    }
    if atoms.is_empty() {
        return Err(Error::Parse {
            context: path.display().to_string(),
            message: "no atom rows".to_string(),
        });
    }
    make_discrete(atoms, weights, false)
}

/// Parses a kernel expression; `default_dim` applies when the expression
/// carries no `dim=..` argument.
pub fn parse_kernel(text: &str, default_dim: usize) -> Result<KernelSpec> {
    let mut c = Cursor::new(text, "kernel");
    let spec = kernel_expr(&mut c, default_dim)?;
    c.expect_end()?;
    Ok(spec)
}

/// Parses a measure expression (without realizing it).
pub fn parse_measure(text: &str) -> Result<MeasureExpr> {
    let mut c = Cursor::new(text, "measure");
    let expr = measure_expr(&mut c)?;
    c.expect_end()?;
    Ok(expr)
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
    context: &'static str,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str, context: &'static str) -> Self {
        Self {
            text,
            pos: 0,
            context,
        }
    }

    fn error(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            context: format!("{} expression at byte {}", self.context, self.pos),
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.text[self.pos..].starts_with(|ch: char| ch.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.text[self.pos..].chars().next()
    }

    fn eat(&mut self, want: char) -> Result<()> {
        match self.peek() {
            Some(c) if c == want => {
                self.pos += want.len_utf8();
                Ok(())
            }
            Some(c) => Err(self.error(format!("expected `{want}`, found `{c}`"))),
            None => Err(self.error(format!("expected `{want}`, found end of input"))),
        }
    }

    fn ident(&mut self) -> Result<&'a str> {
        self.skip_ws();
        let rest = &self.text[self.pos..];
        let len = rest
            .char_indices()
            .take_while(|(_, c)| c.is_ascii_alphanumeric() || *c == '_')
            .map(|(i, c)| i + c.len_utf8())
            .last()
            .unwrap_or(0);
        if len == 0 || rest.starts_with(|c: char| c.is_ascii_digit()) {
            return Err(self.error("expected an identifier"));
        }
        self.pos += len;
        Ok(&rest[..len])
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let rest = &self.text[self.pos..];
        let mut len = 0;
        let bytes = rest.as_bytes();
        if len < bytes.len() && (bytes[len] == b'+' || bytes[len] == b'-') {
            len += 1;
        }
        let digits_start = len;
        while len < bytes.len() && (bytes[len].is_ascii_digit() || bytes[len] == b'.') {
            len += 1;
        }
        if len < bytes.len() && (bytes[len] == b'e' || bytes[len] == b'E') {
            len += 1;
            if len < bytes.len() && (bytes[len] == b'+' || bytes[len] == b'-') {
                len += 1;
            }
            while len < bytes.len() && bytes[len].is_ascii_digit() {
                len += 1;
            }
        }
        if len == digits_start {
            return Err(self.error("expected a number"));
        }
        let s = &rest[..len];
        let value = s
            .parse::<f64>()
            .map_err(|_| self.error(format!("not a number: `{s}`")))?;
        self.pos += len;
        Ok(value)
    }

    /// `[a, b, ...]`, or a bare number as a 1-vector.
    fn vector(&mut self) -> Result<Vec<f64>> {
        if self.peek() == Some('[') {
            self.eat('[')?;
            let mut v = Vec::new();
            if self.peek() == Some(']') {
                return Err(self.error("empty vector"));
            }
            loop {
                v.push(self.number()?);
                match self.peek() {
                    Some(',') => self.eat(',')?,
                    Some(']') => {
                        self.eat(']')?;
                        return Ok(v);
                    }
                    _ => return Err(self.error("expected `,` or `]` in vector")),
                }
            }
        }
        Ok(vec![self.number()?])
    }

    /// Raw value up to the next top-level `,` or `)`, unquoting `"..."`.
    fn raw_value(&mut self) -> Result<String> {
        self.skip_ws();
        if self.peek() == Some('"') {
            self.eat('"')?;
            let rest = &self.text[self.pos..];
            let end = rest
                .find('"')
                .ok_or_else(|| self.error("unterminated string"))?;
            let s = rest[..end].to_string();
            self.pos += end + 1;
            return Ok(s);
        }
        let rest = &self.text[self.pos..];
        let end = rest
            .find([',', ')'])
            .ok_or_else(|| self.error("unterminated argument"))?;
        let s = rest[..end].trim().to_string();
        if s.is_empty() {
            return Err(self.error("empty argument value"));
        }
        self.pos += end;
        Ok(s)
    }

    fn expect_end(&mut self) -> Result<()> {
        self.skip_ws();
        if self.pos != self.text.len() {
            return Err(self.error(format!(
                "unexpected trailing input `{}`",
                &self.text[self.pos..]
            )));
        }
        Ok(())
    }
}

/// One `key=` occurrence bookkeeping: rejects duplicates.
struct Seen<'a> {
    cursor_context: &'static str,
    keys: Vec<&'a str>,
}

impl<'a> Seen<'a> {
    fn new(context: &'static str) -> Self {
        Self {
            cursor_context: context,
            keys: Vec::new(),
        }
    }

    fn mark(&mut self, key: &'a str) -> Result<()> {
        if self.keys.contains(&key) {
            return Err(Error::Parse {
                context: format!("{} expression", self.cursor_context),
                message: format!("duplicate argument `{key}`"),
            });
        }
        self.keys.push(key);
        Ok(())
    }
}

fn require<T>(value: Option<T>, name: &str, head: &str, c: &Cursor) -> Result<T> {
    value.ok_or_else(|| c.error(format!("`{head}` needs the argument `{name}`")))
}

fn as_dim(value: f64, c: &Cursor) -> Result<usize> {
    if value.fract() != 0.0 || !(1.0..=16.0).contains(&value) {
        return Err(c.error(format!(
            "`dim` must be a small positive integer, got {value}"
        )));
    }
    Ok(value as usize)
}

fn kernel_expr(c: &mut Cursor, default_dim: usize) -> Result<KernelSpec> {
    let head = c.ident()?;
    c.eat('(')?;
    let mut tau = None;
    let mut sigma = None;
    let mut nu = None;
    let mut ell = None;
    let mut dim = None;
    let mut seen = Seen::new("kernel");
    if c.peek() != Some(')') {
        loop {
            let key = c.ident()?;
            seen.mark(key)?;
            c.eat('=')?;
            match key {
                "tau" => tau = Some(c.number()?),
                "sigma" => sigma = Some(c.number()?),
                "nu" => nu = Some(c.number()?),
                "ell" => ell = Some(c.number()?),
                "dim" => {
                    let v = c.number()?;
                    dim = Some(as_dim(v, c)?);
                }
                other => return Err(c.error(format!("unknown kernel argument `{other}`"))),
            }
            match c.peek() {
                Some(',') => c.eat(',')?,
                _ => break,
            }
        }
    }
    c.eat(')')?;
    let d = dim.unwrap_or(default_dim);
    let reject_foreign = |allowed: &[&str]| -> Result<()> {
        for k in &seen.keys {
            if *k != "dim" && !allowed.contains(k) {
                return Err(Error::Parse {
                    context: "kernel expression".to_string(),
                    message: format!("`{head}` does not take `{k}`"),
                });
            }
        }
        Ok(())
    };
    match head {
        "laplace" => {
            reject_foreign(&["tau"])?;
            KernelSpec::laplace(require(tau, "tau", head, c)?, d)
        }
        "gaussian" => {
            reject_foreign(&["sigma"])?;
            KernelSpec::gaussian(require(sigma, "sigma", head, c)?, d)
        }
        "matern" => {
            reject_foreign(&["nu", "ell"])?;
            KernelSpec::matern(
                require(nu, "nu", head, c)?,
                require(ell, "ell", head, c)?,
                d,
            )
        }
        other => Err(c.error(format!(
            "unknown kernel `{other}`; expected laplace, gaussian, or matern"
        ))),
    }
}

fn measure_expr(c: &mut Cursor) -> Result<MeasureExpr> {
    let head = c.ident()?;
    c.eat('(')?;
    let expr = match head {
        "dirac" => {
            let mut x = None;
            args(c, |key, c| {
                match key {
                    "x" => x = Some(c.vector()?),
                    other => return Err(c.error(format!("`dirac` does not take `{other}`"))),
                }
                Ok(())
            })?;
            MeasureExpr::Dirac {
                x: require(x, "x", head, c)?,
            }
        }
        "atoms" => {
            let mut file = None;
            args(c, |key, c| {
                match key {
                    "file" => file = Some(PathBuf::from(c.raw_value()?)),
                    other => return Err(c.error(format!("`atoms` does not take `{other}`"))),
                }
                Ok(())
            })?;
            MeasureExpr::Atoms {
                file: require(file, "file", head, c)?,
            }
        }
        "powerlaw" => {
            let mut m = None;
            let mut dim = None;
            args(c, |key, c| {
                match key {
                    "m" => m = Some(c.number()?),
                    "dim" => {
                        let v = c.number()?;
                        dim = Some(as_dim(v, c)?);
                    }
                    other => return Err(c.error(format!("`powerlaw` does not take `{other}`"))),
                }
                Ok(())
            })?;
            MeasureExpr::PowerLaw { m, dim }
        }
        "tilt" => {
            let mut m = None;
            let mut n = None;
            args(c, |key, c| {
                match key {
                    "m" => m = Some(c.number()?),
                    "n" => {
                        let v = c.number()?;
                        if v.fract() != 0.0 || v < 1.0 || v > u32::MAX as f64 {
                            return Err(c.error(format!("`n` must be a positive integer, got {v}")));
                        }
                        n = Some(v as u32);
                    }
                    other => return Err(c.error(format!("`tilt` does not take `{other}`"))),
                }
                Ok(())
            })?;
            MeasureExpr::Tilt {
                m,
                n: require(n, "n", head, c)?,
            }
        }
        "satellite" => {
            // `base=` takes a nested measure expression, so the generic
            // key-value loop does not apply.
            let mut base = None;
            let mut eps = None;
            let mut z = None;
            let mut seen = Seen::new("measure");
            loop {
                let key = c.ident()?;
                seen.mark(key)?;
                c.eat('=')?;
                match key {
                    "base" => base = Some(Box::new(measure_expr(c)?)),
                    "eps" => eps = Some(c.number()?),
                    "z" => z = Some(c.vector()?),
                    other => return Err(c.error(format!("`satellite` does not take `{other}`"))),
                }
                match c.peek() {
                    Some(',') => c.eat(',')?,
                    _ => break,
                }
            }
            MeasureExpr::Satellite {
                base: require(base, "base", head, c)?,
                eps: require(eps, "eps", head, c)?,
                z: require(z, "z", head, c)?,
            }
        }
        other => {
            return Err(c.error(format!(
                "unknown measure `{other}`; expected dirac, atoms, powerlaw, tilt, or satellite"
            )))
        }
    };
    c.eat(')')?;
    Ok(expr)
}

/// Comma-separated `key=value` list ending at `)`, with duplicate detection.
fn args<'a>(
    c: &mut Cursor<'a>,
    mut on_arg: impl FnMut(&'a str, &mut Cursor<'a>) -> Result<()>,
) -> Result<()> {
    let mut seen = Seen::new("measure");
    if c.peek() == Some(')') {
        return Ok(());
    }
    loop {
        let key = c.ident()?;
        seen.mark(key)?;
        c.eat('=')?;
        on_arg(key, c)?;
        match c.peek() {
            Some(',') => c.eat(',')?,
            _ => return Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::KernelFamily;
    use approx::assert_relative_eq;

    #[test]
    fn kernel_grammar_round_trip() {
        let k = parse_kernel("laplace(tau=1.5)", 2).unwrap();
        assert_eq!(k.dim(), 2);
        assert!(matches!(k.family(), KernelFamily::Laplace { tau } if tau == 1.5));

        let k = parse_kernel(" gaussian( sigma = 0.5 , dim = 3 ) ", 1).unwrap();
        assert_eq!(k.dim(), 3);
        assert!(matches!(k.family(), KernelFamily::Gaussian { sigma } if sigma == 0.5));

        let k = parse_kernel("matern(nu=1.5,ell=0.7)", 1).unwrap();
        assert!(matches!(k.family(), KernelFamily::Matern { nu, ell } if nu == 1.5 && ell == 0.7));
    }

    #[test]
    fn kernel_grammar_rejections() {
        assert!(parse_kernel("laplace(tau=1) junk", 1).is_err());
        assert!(parse_kernel("laplace()", 1).is_err());
        assert!(parse_kernel("laplace(tau=1,tau=2)", 1).is_err());
        assert!(parse_kernel("laplace(sigma=1)", 1).is_err());
        assert!(parse_kernel("cauchy(tau=1)", 1).is_err());
        assert!(parse_kernel("matern(nu=1)", 1).is_err());
        assert!(parse_kernel("gaussian(sigma=zero)", 1).is_err());
        assert!(parse_kernel("laplace(tau=1,dim=2.5)", 1).is_err());
        assert!(parse_kernel("laplace(tau=-1)", 1).is_err());
    }

    #[test]
    fn measure_grammar_shapes() {
        assert_eq!(
            parse_measure("dirac(x=0)").unwrap(),
            MeasureExpr::Dirac { x: vec![0.0] }
        );
        assert_eq!(
            parse_measure("dirac(x=[0.5, -1])").unwrap(),
            MeasureExpr::Dirac { x: vec![0.5, -1.0] }
        );
        assert_eq!(
            parse_measure("powerlaw(m=3,dim=1)").unwrap(),
            MeasureExpr::PowerLaw {
                m: Some(3.0),
                dim: Some(1)
            }
        );
        assert_eq!(
            parse_measure("powerlaw()").unwrap(),
            MeasureExpr::PowerLaw { m: None, dim: None }
        );
        assert_eq!(
            parse_measure("tilt(m=3,n=4)").unwrap(),
            MeasureExpr::Tilt { m: Some(3.0), n: 4 }
        );
        assert_eq!(
            parse_measure("atoms(file=\"a b.csv\")").unwrap(),
            MeasureExpr::Atoms {
                file: PathBuf::from("a b.csv")
            }
        );
    }

    #[test]
    fn satellite_expression_nests() {
        let expr = parse_measure(
            "satellite(base=satellite(base=dirac(x=[0,0]), eps=0.3, z=[4,0]), eps=0.1, z=[8,0])",
        )
        .unwrap();
        match expr {
            MeasureExpr::Satellite { base, eps, z } => {
                assert_eq!(eps, 0.1);
                assert_eq!(z, vec![8.0, 0.0]);
                assert!(matches!(*base, MeasureExpr::Satellite { .. }));
            }
            other => panic!("wrong shape: {other:?}"),
        }
    }

    #[test]
    fn measure_grammar_rejections() {
        assert!(parse_measure("dirac()").is_err());
        assert!(parse_measure("dirac(x=[)").is_err());
        assert!(parse_measure("dirac(x=[])").is_err());
        assert!(parse_measure("dirac(y=0)").is_err());
        assert!(parse_measure("tilt(m=3)").is_err());
        assert!(parse_measure("tilt(m=3,n=0)").is_err());
        assert!(parse_measure("tilt(m=3,n=2.5)").is_err());
        assert!(parse_measure("satellite(base=dirac(x=0),eps=0.3)").is_err());
        assert!(parse_measure("blob(x=1)").is_err());
        assert!(parse_measure("dirac(x=1))").is_err());
    }

    #[test]
    fn realize_dirac_and_satellite() {
        let disc = DiscretizationParams::default();
        let m = parse_measure("satellite(base=dirac(x=0), eps=0.25, z=4)")
            .unwrap()
            .realize(1, &disc)
            .unwrap();
        assert_eq!(m.len(), 2);
        assert_relative_eq!(m.total_mass(), 1.0);
        // Dimension mismatches surface as errors, not panics.
        assert!(parse_measure("dirac(x=[1,2])")
            .unwrap()
            .realize(1, &disc)
            .is_err());
    }

    #[test]
    fn realize_power_law_defaults() {
        // powerlaw() in d=1 defaults to m = 3 and realizes as a probability.
        let disc = DiscretizationParams {
            r_max: 60.0,
            cells: 500,
            sectors: 32,
        };
        let cloud = parse_measure("powerlaw()")
            .unwrap()
            .realize(1, &disc)
            .unwrap();
        assert!(cloud.is_probability());
        // Same cloud as the explicit m=3 form.
        let explicit = parse_measure("powerlaw(m=3)")
            .unwrap()
            .realize(1, &disc)
            .unwrap();
        assert!(cloud.measure_eq(&explicit));
        // Declared dim must agree with the realization dim.
        assert!(parse_measure("powerlaw(dim=2)")
            .unwrap()
            .realize(1, &disc)
            .is_err());
    }

    #[test]
    fn realize_tilt_matches_direct_construction() {
        let disc = DiscretizationParams {
            r_max: 30.0,
            cells: 200,
            sectors: 32,
        };
        let via_grammar = parse_measure("tilt(m=3,n=2)")
            .unwrap()
            .realize(1, &disc)
            .unwrap();
        let base = PowerLawDensity::new(3.0, 1).unwrap();
        let density = tilt_density(base, 2).unwrap();
        let grid = RadialGrid::with_sectors(30.0, 200, 32).unwrap();
        let (direct, _) = discretize_density(&Density::Tilted(density), &grid, true).unwrap();
        assert!(via_grammar.measure_eq(&direct));
    }

    #[test]
    fn atoms_csv_round_trip() {
        let dir = std::env::temp_dir();
        let path = dir.join(format!("driftlab-atoms-{}.csv", std::process::id()));
        std::fs::write(&path, "0.0, 1.0, 0.25\n1.5, -2.0, 0.75\n\n").unwrap();
        let m = load_atoms_csv(&path).unwrap();
        assert_eq!(m.dim(), 2);
        assert_eq!(m.len(), 2);
        assert_eq!(m.weight(0), 0.25);
        assert_eq!(m.atom(1), &[1.5, -2.0][..]);

        std::fs::write(&path, "0.0, 1.0\n2.0\n").unwrap();
        assert!(load_atoms_csv(&path).is_err()); // ragged rows
        std::fs::write(&path, "a, 1.0\n").unwrap();
        assert!(load_atoms_csv(&path).is_err()); // non-numeric
        std::fs::write(&path, "").unwrap();
        assert!(load_atoms_csv(&path).is_err()); // empty
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn atoms_expression_realizes_from_file() {
        let dir = std::env::temp_dir();
        let path = dir.join(format!("driftlab-expr-{}.csv", std::process::id()));
        std::fs::write(&path, "-1.0, 0.5\n1.0, 0.5\n").unwrap();
        let text = format!("atoms(file={})", path.display());
        let m = parse_measure(&text)
            .unwrap()
            .realize(1, &DiscretizationParams::default())
            .unwrap();
        assert_eq!(m.len(), 2);
        assert!(m.is_probability());
        std::fs::remove_file(&path).ok();
    }
}
