//! JSON run configuration with dotted-key overrides.
//!
//! ```json
//! {
//!   "method": "fwpa",
//!   "grid": { "dx": 10, "dy": 10 },
//!   "domain": { "width": 1000, "height": 1000 },
//!   "layered": { "v_base": 1500, "dv": 1000, "n_layers": 5 },
//!   "source": { "x": 500, "y": 20, "f_m": 15 },
//!   "receivers": { "y": 20, "x_start": 0, "x_end": 1000, "spacing": 50 },
//!   "t_final": 0.3
//! }
//! ```
//!
//! Exactly one of `layered` and `model_file` is required. The grid is `dx`/`dy`,
//! `h` for both, or `nx`/`ny` cells over the domain. Defaults: `cfl` 0.25, limiter `superbee`, solid top and
//! bottom, extended sides, unit density for layered models.

use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::harness::scenario::{Domain, Method, ModelSource, Scenario};
use crate::harness::signal::{ReceiverLine, SourceSpec};
use crate::model::LayeredModelSpec;
use crate::model_file::load_model;
use crate::riemann::Limiter;
use crate::state::{BoundaryKind, BoundarySpec};

pub const DEFAULT_CFL: f64 = 0.25;

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub scenario: Scenario,
    pub model_file: Option<PathBuf>,
    pub output_dir: PathBuf,
}

/// Apply `key=value` overrides to a JSON document. Keys are dotted paths;
/// values are parsed as JSON when possible and kept as strings otherwise.
pub fn apply_overrides(doc: &mut Value, overrides: &[String]) -> Result<()> {
    for o in overrides {
        let (key, raw) = o
            .split_once('=')
            .ok_or_else(|| Error::config(o.clone(), "override must look like key=value"))?;
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        let mut node = &mut *doc;
        let parts: Vec<&str> = key.split('.').collect();
        for (k, part) in parts.iter().enumerate() {
            let obj = node
                .as_object_mut()
                .ok_or_else(|| Error::config(parts[..k].join("."), "is not an object"))?;
            if k + 1 == parts.len() {
                obj.insert(part.to_string(), value.clone());
                break;
            }
            node = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Map::new()));
        }
    }
    Ok(())
}

struct Obj<'a> {
    path: String,
    map: &'a Map<String, Value>,
}

impl<'a> Obj<'a> {
    fn key(&self, k: &str) -> String {
        if self.path.is_empty() {
            k.to_string()
        } else {
            format!("{}.{k}", self.path)
        }
    }

    fn get(&self, k: &str) -> Option<&'a Value> {
        self.map.get(k).filter(|v| !v.is_null())
    }

    fn f64_opt(&self, k: &str) -> Result<Option<f64>> {
        match self.get(k) {
            None => Ok(None),
            Some(v) => v
                .as_f64()
                .map(Some)
                .ok_or_else(|| Error::config(self.key(k), format!("expected a number, found {v}"))),
        }
    }

    fn f64(&self, k: &str) -> Result<f64> {
        self.f64_opt(k)?.ok_or_else(|| Error::config(self.key(k), "missing required key"))
    }

    fn usize_opt(&self, k: &str) -> Result<Option<usize>> {
        match self.get(k) {
            None => Ok(None),
            Some(v) => v
                .as_u64()
                .map(|n| Some(n as usize))
                .ok_or_else(|| Error::config(self.key(k), format!("expected a non-negative integer, found {v}"))),
        }
    }

    fn str_opt(&self, k: &str) -> Result<Option<&'a str>> {
        match self.get(k) {
            None => Ok(None),
            Some(v) => v
                .as_str()
                .map(Some)
                .ok_or_else(|| Error::config(self.key(k), format!("expected a string, found {v}"))),
        }
    }

    fn f64_list(&self, k: &str) -> Result<Vec<f64>> {
        match self.get(k) {
            None => Ok(Vec::new()),
            Some(Value::Array(a)) => a
                .iter()
                .map(|v| v.as_f64().ok_or_else(|| Error::config(self.key(k), format!("expected numbers, found {v}"))))
                .collect(),
            Some(v) => Err(Error::config(self.key(k), format!("expected an array, found {v}"))),
        }
    }

    fn obj(&self, k: &str) -> Result<Option<Obj<'a>>> {
        match self.get(k) {
            None => Ok(None),
            Some(Value::Object(m)) => Ok(Some(Obj { path: self.key(k), map: m })),
            Some(v) => Err(Error::config(self.key(k), format!("expected an object, found {v}"))),
        }
    }

    fn req_obj(&self, k: &str) -> Result<Obj<'a>> {
        self.obj(k)?.ok_or_else(|| Error::config(self.key(k), "missing required key"))
    }
}

fn boundary_kind(o: &Obj, k: &str, default: BoundaryKind) -> Result<BoundaryKind> {
    match o.str_opt(k)? {
        None => Ok(default),
        Some("solid_wall") | Some("solid") | Some("wall") => Ok(BoundaryKind::SolidWall),
        Some("periodic") => Ok(BoundaryKind::Periodic),
        Some("extended") | Some("extend") => Ok(BoundaryKind::Extended),
        Some(s) => Err(Error::config(o.key(k), format!("unknown boundary `{s}` (solid_wall, periodic, extended)"))),
    }
}

/// Parse and validate a configuration document. Relative `model_file` paths
/// resolve against `base_dir`.
pub fn parse_config_value(doc: &Value, base_dir: &Path) -> Result<SimConfig> {
    let map = doc.as_object().ok_or_else(|| Error::config("", "top level must be a JSON object"))?;
    let root = Obj { path: String::new(), map };

    let method: Method = root
        .str_opt("method")?
        .ok_or_else(|| Error::config("method", "missing required key"))?
        .parse()?;

    let grid = root.req_obj("grid")?;

    let model_file = root.str_opt("model_file")?.map(|p| base_dir.join(p));
    let layered = root.obj("layered")?;
    let (model, file_domain) = match (&model_file, layered) {
        (Some(_), Some(_)) => {
            return Err(Error::config("model_file", "conflicts with `layered`; give exactly one model"))
        }
        (None, None) => return Err(Error::config("layered", "missing model: give `layered` or `model_file`")),
        (Some(path), None) => {
            let (m, g) = load_model(path).map_err(|e| match e {
                Error::Io(io) => Error::Parse { path: path.clone(), msg: io.to_string() },
                other => other,
            })?;
            let d = Domain { x0: g.x0, y0: g.y0, width: g.x_extent(), height: g.y_extent() };
            (ModelSource::Field(m), Some(d))
        }
        (None, Some(l)) => {
            let spec = LayeredModelSpec {
                v_base: l.f64("v_base")?,
                dv: l.f64("dv")?,
                n_layers: l.usize_opt("n_layers")?.ok_or_else(|| Error::config("layered.n_layers", "missing required key"))?,
                lambda_pct: l.f64_opt("lambda_pct")?.unwrap_or(0.0),
            };
            spec.validate().map_err(|e| Error::config("layered", e.to_string()))?;
            (ModelSource::Layered(spec), None)
        }
    };

    let domain = match (root.obj("domain")?, file_domain) {
        (Some(d), _) => Domain {
            x0: d.f64_opt("x0")?.unwrap_or(0.0),
            y0: d.f64_opt("y0")?.unwrap_or(0.0),
            width: d.f64("width")?,
            height: d.f64("height")?,
        },
        (None, Some(d)) => d,
        (None, None) => return Err(Error::config("domain", "missing required key")),
    };

    let (dx, dy) = match (grid.f64_opt("h")?, grid.f64_opt("dx")?, grid.f64_opt("dy")?) {
        (Some(h), None, None) => (h, h),
        (None, Some(dx), Some(dy)) => (dx, dy),
        (None, Some(dx), None) => (dx, dx),
        (Some(_), _, _) => return Err(Error::config("grid.h", "give either h or dx/dy, not both")),
        (None, None, _) => match (grid.usize_opt("nx")?, grid.usize_opt("ny")?) {
            (Some(nx), Some(ny)) if nx > 0 && ny > 0 => (domain.width / nx as f64, domain.height / ny as f64),
            (Some(_), Some(_)) => return Err(Error::config("grid.nx", "cell counts must be positive")),
            _ => return Err(Error::config("grid.dx", "missing required key (or grid.h, or grid.nx and grid.ny)")),
        },
    };

    let s = root.req_obj("source")?;
    let source = SourceSpec {
        x: s.f64("x")?,
        y: s.f64("y")?,
        f_m: s.f64("f_m")?,
        t0: s.f64_opt("t0")?,
        amplitude: s.f64_opt("amplitude")?.unwrap_or(1.0),
    };

    let receivers = match root.obj("receivers")? {
        None => None,
        Some(r) => {
            let y = r.f64("y")?;
            let mut line = match r.get("xs") {
                Some(_) => ReceiverLine { y, xs: r.f64_list("xs")?, every: 1 },
                None => {
                    let spacing = r.f64("spacing")?;
                    if !(spacing > 0.0) {
                        return Err(Error::config("receivers.spacing", "must be positive"));
                    }
                    ReceiverLine::spaced(
                        y,
                        r.f64_opt("x_start")?.unwrap_or(domain.x0),
                        r.f64_opt("x_end")?.unwrap_or(domain.x0 + domain.width),
                        spacing,
                    )
                }
            };
            line.every = r.usize_opt("every")?.unwrap_or(1);
            Some(line)
        }
    };

    let defaults = BoundarySpec::default();
    let boundaries = match root.obj("boundaries")? {
        None => defaults,
        Some(b) => BoundarySpec {
            top: boundary_kind(&b, "top", defaults.top)?,
            bottom: boundary_kind(&b, "bottom", defaults.bottom)?,
            left: boundary_kind(&b, "left", defaults.left)?,
            right: boundary_kind(&b, "right", defaults.right)?,
        },
    };
    boundaries.validate().map_err(|e| Error::config("boundaries", e.to_string()))?;

    let limiter = match root.str_opt("limiter")? {
        None | Some("superbee") => Limiter::Superbee,
        Some("none") => Limiter::None,
        Some(s) => return Err(Error::config("limiter", format!("unknown limiter `{s}` (superbee, none)"))),
    };

    let scenario = Scenario {
        method,
        dx,
        dy,
        domain,
        model,
        source,
        receivers,
        boundaries,
        cfl: root.f64_opt("cfl")?.unwrap_or(DEFAULT_CFL),
        t_final: root.f64("t_final")?,
        snapshots: root.f64_list("snapshots")?,
        cut_x: root.f64_opt("cut_x")?,
        side_pad: root.f64_opt("side_pad")?,
        limiter,
        repeats: root.usize_opt("repeats")?.unwrap_or(1),
    };
    scenario.validate()?;
    let output_dir = PathBuf::from(root.str_opt("output_dir")?.unwrap_or("out"));
    Ok(SimConfig { scenario, model_file, output_dir })
}

/// Read, override and validate a configuration file.
pub fn parse_config_with(path: &Path, overrides: &[String]) -> Result<SimConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse { path: path.to_path_buf(), msg: e.to_string() })?;
    let mut doc: Value =
        serde_json::from_str(&text).map_err(|e| Error::Parse { path: path.to_path_buf(), msg: e.to_string() })?;
    apply_overrides(&mut doc, overrides)?;
    parse_config_value(&doc, path.parent().unwrap_or(Path::new(".")))
}

pub fn parse_config(path: &Path) -> Result<SimConfig> {
    parse_config_with(path, &[])
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn minimal() -> Value {
        json!({
            "method": "dswpa",
            "grid": { "h": 10 },
            "domain": { "width": 1000, "height": 1000 },
            "layered": { "v_base": 1500, "dv": 1000, "n_layers": 5 },
            "source": { "x": 500, "y": 20, "f_m": 15 },
            "t_final": 0.3
        })
    }

    fn parse(v: &Value) -> Result<SimConfig> {
        parse_config_value(v, Path::new("."))
    }

    fn key_of(e: Error) -> String {
        match e {
            Error::Config { key, .. } => key,
            other => panic!("not a config error: {other}"),
        }
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse(&minimal()).unwrap();
        assert_eq!(c.scenario.cfl, 0.25);
        assert_eq!(c.scenario.method, Method::Dswpa);
        assert_eq!((c.scenario.dx, c.scenario.dy), (10.0, 10.0));
        assert_eq!(c.scenario.boundaries, BoundarySpec::default());
        assert_eq!(c.scenario.limiter, Limiter::Superbee);
        assert_eq!(c.scenario.repeats, 1);
        assert!(c.scenario.receivers.is_none());
    }

    #[test]
    fn errors_name_the_key() {
        let mut v = minimal();
        v["model_file"] = json!("m.gsm");
        assert_eq!(key_of(parse(&v).unwrap_err()), "model_file");

        let mut v = minimal();
        v["t_final"] = json!(-1.0);
        assert_eq!(key_of(parse(&v).unwrap_err()), "t_final");

        let mut v = minimal();
        v["source"].as_object_mut().unwrap().remove("f_m");
        assert_eq!(key_of(parse(&v).unwrap_err()), "source.f_m");

        let mut v = minimal();
        v["cfl"] = json!("fast");
        assert_eq!(key_of(parse(&v).unwrap_err()), "cfl");

        let mut v = minimal();
        v["method"] = json!("df4");
        assert_eq!(key_of(parse(&v).unwrap_err()), "method");
    }

    #[test]
    fn overrides_set_nested_keys() {
        let mut v = minimal();
        apply_overrides(&mut v, &["cfl=0.1".into(), "grid.h=20".into(), "method=cup".into(), "boundaries.left=periodic".into(), "boundaries.right=periodic".into()]).unwrap();
        let c = parse(&v).unwrap();
        assert_eq!(c.scenario.cfl, 0.1);
        assert_eq!(c.scenario.dx, 20.0);
        assert_eq!(c.scenario.method, Method::Cup);
        assert_eq!(c.scenario.boundaries.left, BoundaryKind::Periodic);
        assert!(apply_overrides(&mut v, &["novalue".into()]).is_err());
    }

    #[test]
    fn grid_from_cell_counts() {
        let mut v = minimal();
        v["grid"] = json!({ "nx": 100, "ny": 50 });
        let c = parse(&v).unwrap();
        assert_eq!((c.scenario.dx, c.scenario.dy), (10.0, 20.0));
        v["grid"] = json!({});
        assert_eq!(key_of(parse(&v).unwrap_err()), "grid.dx");
    }

    #[test]
    fn receivers_from_spacing() {
        let mut v = minimal();
        v["receivers"] = json!({ "y": 20, "spacing": 50 });
        let c = parse(&v).unwrap();
        assert_eq!(c.scenario.receivers.unwrap().xs.len(), 21);
    }
}
