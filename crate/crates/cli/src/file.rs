//! The germ file format: a single JSON document with shared parameters and
//! a list of labeled germs. Unknown fields are rejected.

use fibcalc_core::{
    compute_params, CoreError, FiberComponent, FiberDescriptor, FiberEdge, ForestNode, GermSpec,
    HorizontalData, KodairaKind,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    pub g: i64,
    pub h: i64,
    pub n: i64,
}

fn default_multiplicity() -> i64 {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberSpec {
    pub kind: KodairaKind,
    #[serde(default = "default_multiplicity")]
    pub multiplicity: i64,
    /// When omitted, the standard Kodaira layout of the kind is used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<FiberComponent>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<FiberEdge>>,
}

impl FiberSpec {
    pub fn to_descriptor(&self) -> FiberDescriptor {
        match (&self.components, &self.edges) {
            (Some(components), edges) => FiberDescriptor {
                kind: self.kind,
                multiplicity: self.multiplicity,
                components: components.clone(),
                edges: edges.clone().unwrap_or_default(),
            },
            (None, _) => FiberDescriptor::standard(self.kind, self.multiplicity),
        }
    }

    pub fn from_descriptor(d: &FiberDescriptor) -> Self {
        let standard = FiberDescriptor::standard(d.kind, d.multiplicity);
        if &standard == d {
            FiberSpec {
                kind: d.kind,
                multiplicity: d.multiplicity,
                components: None,
                edges: None,
            }
        } else {
            FiberSpec {
                kind: d.kind,
                multiplicity: d.multiplicity,
                components: Some(d.components.clone()),
                edges: Some(d.edges.clone()),
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GermEntry {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fiber: Option<FiberSpec>,
    #[serde(default, rename = "in_R", skip_serializing_if = "Vec::is_empty")]
    pub in_r: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub forest: Vec<ForestNode>,
    #[serde(default, skip_serializing_if = "is_default_horizontal")]
    pub horizontal: HorizontalData,
}

fn is_default_horizontal(h: &HorizontalData) -> bool {
    h == &HorizontalData::default()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GermFile {
    pub params: ParamsSpec,
    pub germs: Vec<GermEntry>,
}

impl GermFile {
    pub fn parse(text: &str) -> Result<GermFile, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }

    /// Resolves the file into labeled germ specs.
    pub fn to_germs(&self) -> Result<Vec<(String, GermSpec)>, CoreError> {
        let params = compute_params(self.params.g, self.params.h, self.params.n)?;
        let mut labels = BTreeSet::new();
        let mut out = Vec::new();
        for entry in &self.germs {
            if !labels.insert(entry.label.clone()) {
                return Err(CoreError::InvalidParameter(format!(
                    "duplicate germ label {:?}",
                    entry.label
                )));
            }
            let fiber = match &entry.fiber {
                Some(f) => f.to_descriptor(),
                None => {
                    let kind = if params.h() == 0 {
                        KodairaKind::RuledLine
                    } else {
                        KodairaKind::Smooth
                    };
                    FiberDescriptor::standard(kind, 1)
                }
            };
            out.push((
                entry.label.clone(),
                GermSpec {
                    params,
                    fiber,
                    in_r: entry.in_r.iter().cloned().collect(),
                    forest: entry.forest.clone(),
                    horizontal: entry.horizontal.clone(),
                },
            ));
        }
        Ok(out)
    }

    pub fn from_germs<'a>(
        params: &ParamsSpec,
        germs: impl IntoIterator<Item = (String, &'a GermSpec)>,
    ) -> GermFile {
        GermFile {
            params: params.clone(),
            germs: germs
                .into_iter()
                .map(|(label, g)| GermEntry {
                    label,
                    fiber: Some(FiberSpec::from_descriptor(&g.fiber)),
                    in_r: g.in_r.iter().cloned().collect(),
                    forest: g.forest.clone(),
                    horizontal: g.horizontal.clone(),
                })
                .collect(),
        }
    }

    pub fn render(&self) -> String {
        serde_json::to_string_pretty(self).expect("germ files serialize") + "\n"
    }
}
