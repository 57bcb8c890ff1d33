//! JSON bodies shared by the CLI and the HTTP API.

use base64::Engine;
use serde::{Deserialize, Serialize};
use slider_core::{PointCloud, ProbeOutput, ProbeResult};

use crate::pgm::encode_pgm;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssociationBody {
    pub word: String,
    pub similarity: f64,
    pub coord: f64,
}

/// Probe response. Words models fill `associations`, image models fill
/// `image_pgm` (base64 of a binary PGM); the other key is omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeBody {
    pub t: f64,
    pub probe_point: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub associations: Option<Vec<AssociationBody>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_pgm: Option<String>,
}

impl From<&ProbeResult> for ProbeBody {
    fn from(r: &ProbeResult) -> Self {
        let (associations, image_pgm) = match &r.output {
            ProbeOutput::Associations(list) => (
                Some(
                    list.iter()
                        .map(|a| AssociationBody {
                            word: a.word.clone(),
                            similarity: a.similarity,
                            coord: a.coord,
                        })
                        .collect(),
                ),
                None,
            ),
            ProbeOutput::Image(img) => (
                None,
                Some(base64::engine::general_purpose::STANDARD.encode(encode_pgm(img))),
            ),
        };
        ProbeBody {
            t: r.t,
            probe_point: r.probe_point.clone(),
            associations,
            image_pgm,
        }
    }
}

pub fn probe_json(result: &ProbeResult) -> Vec<u8> {
    serde_json::to_vec(&ProbeBody::from(result)).expect("probe body serializes")
}

/// Point cloud as UTF-8 JSON. Keys appear in a fixed order, absent optional
/// fields are `null`, and every number is the shortest text that parses back
/// to the same binary32 value.
pub fn serialize_point_cloud(cloud: &PointCloud) -> Vec<u8> {
    serde_json::to_vec(cloud).expect("point cloud serializes")
}

pub fn parse_point_cloud(bytes: &[u8]) -> serde_json::Result<PointCloud> {
    serde_json::from_slice(bytes)
}
