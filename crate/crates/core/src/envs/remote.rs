//! Client for environments served over the bridge wire protocol.
//!
//! Newline-delimited JSON over TCP, one UTF-8 object per line. Requests:
//!
//! ```text
//! {"cmd":"spec"}
//! {"cmd":"reset","seed":7}
//! {"cmd":"step","action":[0.1, -0.2]}
//! {"cmd":"set_mask","remove":["velocity"]}
//! {"cmd":"set_mass","body":"torso","scale":0.5}
//! {"cmd":"close"}
//! ```
//!
//! Replies are `{"ok":true, ...payload}` or `{"ok":false,"error":"..."}`. The
//! spec payload is `{"obs_dim":N,"act_dim":A,"segments":{"position":22,...}}`
//! with optional `env_id`, `act_low`, `act_high` and `bodies`; reset replies
//! carry `obs`; step replies carry `obs`, `reward`, `terminated`, `truncated`.
//! Masking happens server side, so observations arrive already projected.

use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::time::Duration;

use serde_json::{json, Map, Value};

use super::{
    check_action, check_mass_scale, masked_dim, ActionBounds, Attribute, Environment, ObsMask,
    ObservationAttributeSpec, SegmentMap, StepResult,
};
use crate::{Error, Result};

/// Body identifiers of the humanoid bridge; paired limbs scale together.
pub const HUMANOID_BODIES: [&str; 6] = ["hands", "shins", "thighs", "upper_arms", "pelvis", "torso"];

const IO_TIMEOUT: Duration = Duration::from_secs(120);

pub struct RemoteEnv {
    env_id: String,
    reader: BufReader<TcpStream>,
    writer: TcpStream,
    full_spec: ObservationAttributeSpec,
    spec: ObservationAttributeSpec,
    bounds: ActionBounds,
    bodies: Vec<String>,
}

struct SpecReply {
    obs_dim: usize,
    act_dim: usize,
    segments: Vec<(Attribute, usize)>,
    env_id: Option<String>,
    bounds: Option<(Vec<f64>, Vec<f64>)>,
    bodies: Option<Vec<String>>,
}

impl RemoteEnv {
    /// Connects, checks the server's layout against `segment_map`, and
    /// installs `mask` on the server.
    pub fn connect(endpoint: &str, env_id: &str, segment_map: &SegmentMap, mask: &ObsMask) -> Result<Self> {
        segment_map.validate()?;
        let stream = TcpStream::connect(endpoint).map_err(|source| Error::ConnectionRefused {
            endpoint: endpoint.to_string(),
            source,
        })?;
        stream
            .set_read_timeout(Some(IO_TIMEOUT))
            .and_then(|_| stream.set_write_timeout(Some(IO_TIMEOUT)))
            .and_then(|_| stream.set_nodelay(true))
            .map_err(|e| Error::io(endpoint, e))?;
        let writer = stream.try_clone().map_err(|e| Error::io(endpoint, e))?;

        let full_spec = segment_map.attribute_spec()?;
        let mut env = Self {
            env_id: env_id.to_string(),
            reader: BufReader::new(stream),
            writer,
            spec: full_spec.clone(),
            full_spec,
            bounds: ActionBounds::symmetric(1.0, 1),
            bodies: Vec::new(),
        };

        let reply = env.query_spec()?;
        if let Some(server_id) = &reply.env_id {
            if server_id != env_id {
                return Err(Error::SpecMismatch(format!(
                    "server runs {server_id:?}, client asked for {env_id:?}"
                )));
            }
        }
        let declared: Vec<(Attribute, usize)> = env
            .full_spec
            .segments()
            .iter()
            .map(|s| (s.attribute, s.length))
            .collect();
        let mut reported = reply.segments.clone();
        reported.sort();
        if reported != declared {
            return Err(Error::SpecMismatch(format!(
                "server segments {reported:?} differ from segment map {declared:?}"
            )));
        }
        if reply.obs_dim != env.full_spec.total_dim() {
            return Err(Error::SpecMismatch(format!(
                "server reports obs_dim {} for segments totalling {}",
                reply.obs_dim,
                env.full_spec.total_dim()
            )));
        }
        env.bounds = match reply.bounds {
            Some((low, high)) => ActionBounds::new(low, high)
                .map_err(|e| Error::Protocol(format!("bad action bounds in spec reply: {e}")))?,
            None => ActionBounds::symmetric(1.0, reply.act_dim),
        };
        if env.bounds.width() != reply.act_dim {
            return Err(Error::Protocol(format!(
                "act_dim {} disagrees with {} action bounds",
                reply.act_dim,
                env.bounds.width()
            )));
        }
        env.bodies = reply
            .bodies
            .unwrap_or_else(|| HUMANOID_BODIES.iter().map(|b| b.to_string()).collect());

        if !mask.is_empty() {
            let remove: Vec<&str> = mask.removed().map(Attribute::name).collect();
            env.request(json!({"cmd": "set_mask", "remove": remove}))?;
            let masked = env.query_spec()?;
            let expected = masked_dim(&env.full_spec, mask);
            if masked.obs_dim != expected {
                return Err(Error::SpecMismatch(format!(
                    "server reports obs_dim {} under mask {}, expected {expected}",
                    masked.obs_dim,
                    mask.label()
                )));
            }
        }
        env.spec = env.full_spec.masked(mask)?;
        Ok(env)
    }

    /// Unmasked layout agreed at connect time.
    pub fn full_spec(&self) -> &ObservationAttributeSpec {
        &self.full_spec
    }

    fn request(&mut self, message: Value) -> Result<Map<String, Value>> {
        let mut line = serde_json::to_string(&message)?;
        line.push('\n');
        self.writer
            .write_all(line.as_bytes())
            .and_then(|_| self.writer.flush())
            .map_err(|e| Error::Protocol(format!("failed to send request: {e}")))?;

        let mut reply = String::new();
        let read = self
            .reader
            .read_line(&mut reply)
            .map_err(|e| Error::Protocol(format!("failed to read reply: {e}")))?;
        if read == 0 {
            return Err(Error::Protocol("server closed the connection".into()));
        }
        let value: Value = serde_json::from_str(reply.trim_end())
            .map_err(|e| Error::Protocol(format!("reply is not JSON ({e}): {:?}", reply.trim_end())))?;
        let Value::Object(object) = value else {
            return Err(Error::Protocol(format!("reply is not a JSON object: {reply:?}")));
        };
        match object.get("ok") {
            Some(Value::Bool(true)) => Ok(object),
            Some(Value::Bool(false)) => Err(Error::Remote(
                object
                    .get("error")
                    .and_then(Value::as_str)
                    .unwrap_or("unspecified error")
                    .to_string(),
            )),
            _ => Err(Error::Protocol(format!("reply lacks a boolean \"ok\": {reply:?}"))),
        }
    }

    fn query_spec(&mut self) -> Result<SpecReply> {
        let reply = self.request(json!({"cmd": "spec"}))?;
        let obs_dim = field_usize(&reply, "obs_dim")?;
        let act_dim = field_usize(&reply, "act_dim")?;
        let segments = reply
            .get("segments")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::Protocol("spec reply lacks a \"segments\" object".into()))?
            .iter()
            .map(|(name, len)| {
                let attribute: Attribute = name
                    .parse()
                    .map_err(|_| Error::Protocol(format!("unknown attribute {name:?} in spec reply")))?;
                let length = len
                    .as_u64()
                    .ok_or_else(|| Error::Protocol(format!("segment {name:?} length is not an integer")))?;
                Ok((attribute, length as usize))
            })
            .collect::<Result<Vec<_>>>()?;
        let env_id = reply.get("env_id").and_then(Value::as_str).map(str::to_string);
        let bounds = match (reply.get("act_low"), reply.get("act_high")) {
            (Some(low), Some(high)) => Some((float_array(low, "act_low")?, float_array(high, "act_high")?)),
            _ => None,
        };
        let bodies = reply
            .get("bodies")
            .and_then(Value::as_array)
            .map(|a| a.iter().filter_map(Value::as_str).map(str::to_string).collect());
        Ok(SpecReply {
            obs_dim,
            act_dim,
            segments,
            env_id,
            bounds,
            bodies,
        })
    }

    fn observation(&self, reply: &Map<String, Value>) -> Result<Vec<f32>> {
        let obs = float_array(
            reply
                .get("obs")
                .ok_or_else(|| Error::Protocol("reply lacks \"obs\"".into()))?,
            "obs",
        )?;
        if obs.len() != self.spec.total_dim() {
            return Err(Error::Protocol(format!(
                "observation has width {}, expected {}",
                obs.len(),
                self.spec.total_dim()
            )));
        }
        Ok(obs.into_iter().map(|v| v as f32).collect())
    }
}

fn field_usize(reply: &Map<String, Value>, key: &str) -> Result<usize> {
    reply
        .get(key)
        .and_then(Value::as_u64)
        .map(|v| v as usize)
        .ok_or_else(|| Error::Protocol(format!("reply lacks integer field {key:?}")))
}

fn field_bool(reply: &Map<String, Value>, key: &str) -> Result<bool> {
    reply
        .get(key)
        .and_then(Value::as_bool)
        .ok_or_else(|| Error::Protocol(format!("reply lacks boolean field {key:?}")))
}

fn float_array(value: &Value, key: &str) -> Result<Vec<f64>> {
    value
        .as_array()
        .and_then(|a| a.iter().map(Value::as_f64).collect::<Option<Vec<_>>>())
        .ok_or_else(|| Error::Protocol(format!("{key:?} is not an array of numbers")))
}

impl Environment for RemoteEnv {
    fn id(&self) -> &str {
        &self.env_id
    }

    fn observation_spec(&self) -> &ObservationAttributeSpec {
        &self.spec
    }

    fn action_bounds(&self) -> &ActionBounds {
        &self.bounds
    }

    fn reset(&mut self, seed: u64) -> Result<Vec<f32>> {
        let reply = self.request(json!({"cmd": "reset", "seed": seed}))?;
        self.observation(&reply)
    }

    fn step(&mut self, action: &[f32]) -> Result<StepResult> {
        check_action(action, self.bounds.width())?;
        let action: Vec<f64> = action.iter().map(|a| *a as f64).collect();
        let reply = self.request(json!({"cmd": "step", "action": action}))?;
        let observation = self.observation(&reply)?;
        let reward = reply
            .get("reward")
            .and_then(Value::as_f64)
            .ok_or_else(|| Error::Protocol("step reply lacks a numeric \"reward\"".into()))?;
        Ok(StepResult {
            observation,
            reward,
            terminated: field_bool(&reply, "terminated")?,
            truncated: field_bool(&reply, "truncated")?,
        })
    }

    fn bodies(&self) -> Vec<String> {
        self.bodies.clone()
    }

    fn set_mass_scale(&mut self, body: &str, scale: f64) -> Result<()> {
        check_mass_scale(scale)?;
        if !self.bodies.iter().any(|b| b == body) {
            return Err(Error::config(format!(
                "unknown body {body:?}; {} has {:?}",
                self.env_id, self.bodies
            )));
        }
        self.request(json!({"cmd": "set_mass", "body": body, "scale": scale}))?;
        Ok(())
    }
}

impl Drop for RemoteEnv {
    fn drop(&mut self) {
        let _ = self.writer.write_all(b"{\"cmd\":\"close\"}\n");
    }
}
