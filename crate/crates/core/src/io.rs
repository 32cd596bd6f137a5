//! Versioned JSON documents and the tabular recognition report.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DemonstrationDataset, LabeledConfiguration, ObjectState, Trajectory};
use crate::prediction::PredictionCloud;
use crate::recognition::RecognitionResult;
use crate::tree::SceneInstance;

pub const FORMAT_VERSION: &str = "1";

/// A payload together with the format version and a kind tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document<T> {
    pub version: String,
    pub kind: String,
    #[serde(flatten)]
    pub body: T,
}

/// Payload types that can be stored as a [`Document`].
pub trait DocumentKind: Serialize + DeserializeOwned {
    const KIND: &'static str;
}

pub fn to_json<T: DocumentKind>(body: &T) -> Result<String> {
    #[derive(Serialize)]
    struct Out<'a, T> {
        version: &'static str,
        kind: &'static str,
        #[serde(flatten)]
        body: &'a T,
    }
    let mut text = serde_json::to_string_pretty(&Out { version: FORMAT_VERSION, kind: T::KIND, body })?;
    text.push('\n');
    Ok(text)
}

pub fn from_json<T: DocumentKind>(text: &str) -> Result<T> {
    #[derive(Deserialize)]
    struct Header {
        version: Option<String>,
        kind: Option<String>,
    }
    let header: Header = serde_json::from_str(text)?;
    match header.version.as_deref() {
        Some(FORMAT_VERSION) => {}
        other => return Err(Error::UnsupportedVersion(other.unwrap_or("<missing>").to_string())),
    }
    if let Some(kind) = header.kind {
        if kind != T::KIND {
            return Err(Error::InvalidDataset(format!("expected a {} document, found {kind}", T::KIND)));
        }
    }
    let doc: Document<T> = serde_json::from_str(text)?;
    Ok(doc.body)
}

pub fn save<T: DocumentKind>(path: impl AsRef<Path>, body: &T) -> Result<()> {
    fs::write(path, to_json(body)?)?;
    Ok(())
}

pub fn load<T: DocumentKind>(path: impl AsRef<Path>) -> Result<T> {
    from_json(&fs::read_to_string(path)?)
}

/// Serialized form of a [`DemonstrationDataset`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetBody {
    pub category: String,
    pub trajectories: Vec<Trajectory>,
}

impl From<&DemonstrationDataset> for DatasetBody {
    fn from(ds: &DemonstrationDataset) -> Self {
        Self { category: ds.category.clone(), trajectories: ds.trajectories().cloned().collect() }
    }
}

impl TryFrom<DatasetBody> for DemonstrationDataset {
    type Error = Error;

    fn try_from(body: DatasetBody) -> Result<Self> {
        DemonstrationDataset::new(body.category, body.trajectories)
    }
}

impl DocumentKind for DatasetBody {
    const KIND: &'static str = "dataset";
}

impl DocumentKind for crate::tree::IsmTree {
    const KIND: &'static str = "tree";
}

impl DocumentKind for crate::topology::RelationTopology {
    const KIND: &'static str = "topology";
}

/// One object configuration to recognize.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigurationBody {
    pub objects: Vec<ObjectState>,
}

impl DocumentKind for ConfigurationBody {
    const KIND: &'static str = "configuration";
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSetBody {
    pub configurations: Vec<LabeledConfiguration>,
}

impl DocumentKind for TestSetBody {
    const KIND: &'static str = "testset";
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBody {
    pub category: String,
    pub instances: Vec<SceneInstance>,
}

impl DocumentKind for ReportBody {
    const KIND: &'static str = "report";
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloudBody {
    pub category: String,
    #[serde(flatten)]
    pub cloud: PredictionCloud,
}

impl DocumentKind for CloudBody {
    const KIND: &'static str = "cloud";
}

pub fn save_dataset(path: impl AsRef<Path>, ds: &DemonstrationDataset) -> Result<()> {
    save(path, &DatasetBody::from(ds))
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<DemonstrationDataset> {
    load::<DatasetBody>(path)?.try_into()
}

/// Renders recognition results as text tables: one table per ISM result
/// with similarity, position and orientation compliance per object and
/// the objective value. Placeholder similarities are shown weighted.
pub fn render_report(report: &ReportBody) -> String {
    let mut out = String::new();
    if report.instances.is_empty() {
        let _ = writeln!(out, "No instance of {} recognized.", report.category);
        return out;
    }
    for (i, inst) in report.instances.iter().enumerate() {
        let p = inst.pose.position;
        let _ = writeln!(
            out,
            "Instance {} of {}: confidence {:.2}, pose ({:.3}, {:.3}, {:.3})",
            i + 1,
            inst.category,
            inst.confidence,
            p.x,
            p.y,
            p.z
        );
        for r in inst.results() {
            render_result(&mut out, r);
        }
        out.push('\n');
    }
    out
}

fn render_result(out: &mut String, r: &RecognitionResult) {
    let names: Vec<String> = r.participants.iter().map(|p| p.state.id.class_label.clone()).collect();
    let width = names.iter().map(String::len).max().unwrap_or(0).max("Obj. Function".len());
    let _ = writeln!(out, "  ISM {} (confidence {:.2})", r.ism_label, r.confidence);
    let _ = writeln!(out, "    {:<width$}  {:>6}  {:>6}  {:>7}", "Object", "Simil.", "Pos.", "Orient.");
    for (name, p) in names.iter().zip(&r.participants) {
        let _ = writeln!(
            out,
            "    {:<width$}  {:>6.2}  {:>6.2}  {:>7.2}",
            name,
            p.contribution(),
            p.position_compliance,
            p.orientation_compliance
        );
    }
    let _ = writeln!(out, "    {:<width$}  {:>6.2}", "Obj. Function", r.objective);
}
