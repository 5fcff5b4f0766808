//! Config documents: one JSON object per task, read field by field so that
//! every validation error names the field and the line it sits on.

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::fmt;

use ergolab_core::rank_one::{RankOne, RankOneSpec, DEFAULT_STAGE_CAP};
use ergolab_core::rational::{parse_q, Q};
use ergolab_core::systems::{make_system, PointState, SystemSpec};
use ergolab_core::Model;
use serde_json::{Map, Value};

/// Keys every config may carry regardless of task.
const COMMON_KEYS: &[&str] = &["task", "system", "preset", "rank_one", "stage_cap", "sets", "seed", "out", "description", "expect", "expect_error"];

#[derive(Debug)]
pub struct ConfigError {
    pub field: String,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "config line {l}, field `{}`: {}", self.field, self.message),
            None => write!(f, "config field `{}`: {}", self.field, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

pub type CResult<T> = std::result::Result<T, ConfigError>;

pub struct Config {
    text: String,
    map: Map<String, Value>,
    used: RefCell<BTreeSet<String>>,
}

impl Config {
    pub fn parse(text: &str) -> CResult<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| ConfigError {
            field: "<document>".into(),
            line: Some(e.line()),
            message: e.to_string(),
        })?;
        let Value::Object(map) = value else {
            return Err(ConfigError { field: "<document>".into(), line: Some(1), message: "expected a JSON object".into() });
        };
        Ok(Config { text: text.to_string(), map, used: RefCell::new(BTreeSet::new()) })
    }

    /// 1-based line of the first occurrence of `"key"` in the source text.
    fn line_of(&self, key: &str) -> Option<usize> {
        let needle = format!("\"{key}\"");
        self.text.find(&needle).map(|pos| self.text[..pos].matches('\n').count() + 1)
    }

    pub fn error(&self, field: &str, message: impl Into<String>) -> ConfigError {
        ConfigError { field: field.into(), line: self.line_of(field), message: message.into() }
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.used.borrow_mut().insert(key.to_string());
        self.map.get(key)
    }

    pub fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    pub fn require(&self, key: &str) -> CResult<&Value> {
        self.get(key).ok_or_else(|| self.error(key, "missing required field"))
    }

    pub fn task(&self) -> CResult<String> {
        self.str_value("task", self.require("task")?)
    }

    pub fn str_value(&self, key: &str, v: &Value) -> CResult<String> {
        v.as_str().map(str::to_string).ok_or_else(|| self.error(key, "expected a string"))
    }

    pub fn string(&self, key: &str) -> CResult<String> {
        self.str_value(key, self.require(key)?)
    }

    pub fn opt_string(&self, key: &str) -> CResult<Option<String>> {
        self.get(key).map(|v| self.str_value(key, v)).transpose()
    }

    pub fn int_value(&self, key: &str, v: &Value) -> CResult<i64> {
        v.as_i64().ok_or_else(|| self.error(key, "expected an integer"))
    }

    pub fn int(&self, key: &str) -> CResult<i64> {
        self.int_value(key, self.require(key)?)
    }

    pub fn opt_int(&self, key: &str) -> CResult<Option<i64>> {
        self.get(key).map(|v| self.int_value(key, v)).transpose()
    }

    pub fn uint(&self, key: &str) -> CResult<u64> {
        let v = self.int(key)?;
        u64::try_from(v).map_err(|_| self.error(key, "expected a non-negative integer"))
    }

    pub fn uint_or(&self, key: &str, default: u64) -> CResult<u64> {
        match self.opt_int(key)? {
            Some(v) => u64::try_from(v).map_err(|_| self.error(key, "expected a non-negative integer")),
            None => Ok(default),
        }
    }

    pub fn positive(&self, key: &str) -> CResult<usize> {
        let v = self.uint(key)?;
        if v == 0 {
            return Err(self.error(key, "must be at least 1"));
        }
        Ok(v as usize)
    }

    pub fn positive_or(&self, key: &str, default: usize) -> CResult<usize> {
        let v = self.uint_or(key, default as u64)?;
        if v == 0 {
            return Err(self.error(key, "must be at least 1"));
        }
        Ok(v as usize)
    }

    pub fn bool_or(&self, key: &str, default: bool) -> CResult<bool> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.as_bool().ok_or_else(|| self.error(key, "expected true or false")),
        }
    }

    pub fn float_or(&self, key: &str, default: f64) -> CResult<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.as_f64().ok_or_else(|| self.error(key, "expected a number")),
        }
    }

    /// A rational given as `"p/q"`, `"p"` or a JSON integer.
    pub fn rational_value(&self, key: &str, v: &Value) -> CResult<Q> {
        match v {
            Value::String(s) => parse_q(s).map_err(|e| self.error(key, e.to_string())),
            Value::Number(n) if n.is_i64() => Ok(Q::from_integer(n.as_i64().unwrap().into())),
            _ => Err(self.error(key, "expected a rational \"p/q\"")),
        }
    }

    pub fn opt_rational(&self, key: &str) -> CResult<Option<Q>> {
        self.get(key).map(|v| self.rational_value(key, v)).transpose()
    }

    pub fn int_list(&self, key: &str) -> CResult<Vec<i64>> {
        let v = self.require(key)?;
        let arr = v.as_array().ok_or_else(|| self.error(key, "expected a list of integers"))?;
        arr.iter().map(|x| self.int_value(key, x)).collect()
    }

    pub fn opt_int_list(&self, key: &str) -> CResult<Option<Vec<i64>>> {
        if self.has(key) {
            self.int_list(key).map(Some)
        } else {
            Ok(None)
        }
    }

    /// Fields present in the document that no reader asked for.
    pub fn check_unused(&self) -> CResult<()> {
        let used = self.used.borrow();
        for key in self.map.keys() {
            if !used.contains(key) && !COMMON_KEYS.contains(&key.as_str()) {
                return Err(self.error(key, "unknown field for this task"));
            }
        }
        Ok(())
    }

    pub fn seed(&self) -> CResult<u64> {
        self.uint_or("seed", 0)
    }

    /// The model: `system` for the exact systems, `preset` or `rank_one` for rank-one.
    pub fn model(&self) -> CResult<Model> {
        let picks = ["system", "preset", "rank_one"].iter().filter(|k| self.has(k)).count();
        if picks > 1 {
            return Err(self.error("system", "give exactly one of system, preset, rank_one"));
        }
        if let Some(v) = self.get("system") {
            return Ok(Model::System(self.system_value("system", v)?));
        }
        let spec = if let Some(v) = self.get("preset") {
            let name = self.str_value("preset", v)?;
            RankOneSpec::preset(&name).map_err(|e| self.error("preset", e.to_string()))?
        } else if let Some(v) = self.get("rank_one") {
            self.rank_one_value(v)?
        } else {
            return Err(self.error("system", "missing model: give system, preset or rank_one"));
        };
        let cap = self.uint_or("stage_cap", DEFAULT_STAGE_CAP as u64)? as usize;
        Ok(Model::RankOne(RankOne::with_cap(spec, cap)))
    }

    pub fn system_value(&self, key: &str, v: &Value) -> CResult<ergolab_core::systems::System> {
        let obj = v.as_object().ok_or_else(|| self.error(key, "expected an object with a `kind`"))?;
        let kind = obj.get("kind").and_then(Value::as_str).ok_or_else(|| self.error(key, "missing `kind`"))?;
        let spec = match kind {
            "rotation" => {
                let a = obj.get("angle").ok_or_else(|| self.error(key, "rotation needs `angle`"))?;
                SystemSpec::Rotation { angle: self.rational_value("angle", a)? }
            }
            "torus" => {
                let a = obj.get("angles").and_then(Value::as_array).ok_or_else(|| self.error(key, "torus needs `angles`"))?;
                SystemSpec::Torus { angles: a.iter().map(|x| self.rational_value("angles", x)).collect::<CResult<_>>()? }
            }
            "bernoulli" => SystemSpec::Bernoulli,
            "baker" => SystemSpec::Baker,
            other => return Err(self.error(key, format!("unknown system kind {other:?}"))),
        };
        make_system(spec).map_err(|e| self.error(key, e.to_string()))
    }

    fn rank_one_value(&self, v: &Value) -> CResult<RankOneSpec> {
        let key = "rank_one";
        let obj = v.as_object().ok_or_else(|| self.error(key, "expected an object"))?;
        if let Some(p) = obj.get("preset") {
            let name = p.as_str().ok_or_else(|| self.error(key, "preset must be a string"))?;
            return RankOneSpec::preset(name).map_err(|e| self.error(key, e.to_string()));
        }
        let cuts: Vec<u64> = serde_json::from_value(obj.get("cuts").cloned().unwrap_or(Value::Null))
            .map_err(|_| self.error(key, "`cuts` must be a list of integers"))?;
        let spacers: Vec<Vec<u64>> = serde_json::from_value(obj.get("spacers").cloned().unwrap_or(Value::Null))
            .map_err(|_| self.error(key, "`spacers` must be a list of integer lists"))?;
        RankOneSpec::custom(cuts, spacers).map_err(|e| self.error(key, e.to_string()))
    }

    /// A set reference: a name from `sets` or a literal.
    pub fn set_text(&self, key: &str, v: &Value) -> CResult<String> {
        let text = self.str_value(key, v)?;
        if let Some(named) = self.map.get("sets").and_then(|s| s.get(&text)) {
            return named.as_str().map(str::to_string).ok_or_else(|| self.error("sets", format!("set {text:?} must be a string")));
        }
        Ok(text)
    }

    /// Starting point: `"p/q"` on the circle, a list on the torus, or `{"seed": n}`.
    pub fn point(&self, key: &str, sys: &ergolab_core::systems::System, default_seed: u64) -> CResult<PointState> {
        match self.get(key) {
            None => Ok(sys.seeded_point(default_seed)),
            Some(Value::Object(o)) => {
                let s = o.get("seed").and_then(Value::as_u64).ok_or_else(|| self.error(key, "expected {\"seed\": n}"))?;
                Ok(sys.seeded_point(s))
            }
            Some(v @ Value::Array(a)) => {
                let _ = v;
                let xs = a.iter().map(|x| self.rational_value(key, x)).collect::<CResult<Vec<_>>>()?;
                Ok(PointState::Torus(xs))
            }
            Some(v) => Ok(PointState::Rotation(self.rational_value(key, v)?)),
        }
    }
}
