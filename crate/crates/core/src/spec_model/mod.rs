//! The declarative chart specification: what the user put on which shelf,
//! which fields they derived, how the data is filtered, sorted and stacked,
//! and presentation settings. Parsed from and serialized to a versioned
//! JSON document whose canonical form is byte-stable.

mod mark;
mod validate;

pub use mark::default_mark;
pub use validate::{validate_against, FieldCatalog, FieldInfo, FieldOrigin, Role, Violation};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::value::Scalar;

pub const SPEC_VERSION: u64 = 1;

/// Key inside `config.style` holding the measures of a table (pivot) mark.
pub const TABLE_VALUES_KEY: &str = "table_values";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecError {
    #[error("invalid JSON: {0}")]
    JsonSyntax(String),
    #[error("schema violation at {path}: {reason}")]
    SchemaViolation { path: String, reason: String },
    #[error("unsupported spec version {0}")]
    UnsupportedVersion(String),
}

impl SpecError {
    pub fn code(&self) -> &'static str {
        match self {
            SpecError::JsonSyntax(_) => "JsonSyntax",
            SpecError::SchemaViolation { .. } => "SchemaViolation",
            SpecError::UnsupportedVersion(_) => "UnsupportedVersion",
        }
    }

    fn schema(path: impl Into<String>, reason: impl Into<String>) -> SpecError {
        SpecError::SchemaViolation {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphicSpec {
    pub version: u64,
    pub name: String,
    pub mark: MarkType,
    pub aggregated: bool,
    pub channels: Channels,
    pub computed: Vec<ComputedField>,
    pub filters: Vec<Filter>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sort: Option<SortSpec>,
    pub stack: StackMode,
    pub config: ChartConfig,
}

impl GraphicSpec {
    /// An empty chart with default settings.
    pub fn empty(name: impl Into<String>) -> GraphicSpec {
        GraphicSpec {
            version: SPEC_VERSION,
            name: name.into(),
            mark: MarkType::Auto,
            aggregated: true,
            channels: Channels::default(),
            computed: Vec::new(),
            filters: Vec::new(),
            sort: None,
            stack: StackMode::None,
            config: ChartConfig::default(),
        }
    }

    /// Measures of a table mark, read from `config.style.table_values`.
    pub fn table_values(&self) -> Vec<FieldRef> {
        self.config
            .style
            .get(TABLE_VALUES_KEY)
            .and_then(|v| serde_json::from_value(v.clone()).ok())
            .unwrap_or_default()
    }

    pub fn set_table_values(&mut self, values: &[FieldRef]) {
        let value = serde_json::to_value(values).expect("field refs serialize");
        self.config.style.insert(TABLE_VALUES_KEY.to_string(), value);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MarkType {
    Auto,
    Bar,
    Line,
    Area,
    Point,
    Circle,
    Tick,
    Rect,
    Arc,
    Text,
    Table,
}

impl MarkType {
    pub const ALL: [MarkType; 11] = [
        MarkType::Auto,
        MarkType::Bar,
        MarkType::Line,
        MarkType::Area,
        MarkType::Point,
        MarkType::Circle,
        MarkType::Tick,
        MarkType::Rect,
        MarkType::Arc,
        MarkType::Text,
        MarkType::Table,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MarkType::Auto => "auto",
            MarkType::Bar => "bar",
            MarkType::Line => "line",
            MarkType::Area => "area",
            MarkType::Point => "point",
            MarkType::Circle => "circle",
            MarkType::Tick => "tick",
            MarkType::Rect => "rect",
            MarkType::Arc => "arc",
            MarkType::Text => "text",
            MarkType::Table => "table",
        }
    }
}

/// Encoding shelves. Single-slot channels hold at most one field.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Channels {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub x: Vec<FieldRef>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub y: Vec<FieldRef>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub color: Vec<FieldRef>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub size: Vec<FieldRef>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub shape: Vec<FieldRef>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub opacity: Vec<FieldRef>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    X,
    Y,
    Color,
    Size,
    Shape,
    Opacity,
}

impl Channel {
    /// Fixed channel order used for group-by derivation.
    pub const ORDER: [Channel; 6] = [
        Channel::X,
        Channel::Y,
        Channel::Color,
        Channel::Size,
        Channel::Shape,
        Channel::Opacity,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Channel::X => "x",
            Channel::Y => "y",
            Channel::Color => "color",
            Channel::Size => "size",
            Channel::Shape => "shape",
            Channel::Opacity => "opacity",
        }
    }

    pub fn is_single_slot(self) -> bool {
        !matches!(self, Channel::X | Channel::Y)
    }
}

impl Channels {
    pub fn get(&self, channel: Channel) -> &[FieldRef] {
        match channel {
            Channel::X => &self.x,
            Channel::Y => &self.y,
            Channel::Color => &self.color,
            Channel::Size => &self.size,
            Channel::Shape => &self.shape,
            Channel::Opacity => &self.opacity,
        }
    }

    pub fn get_mut(&mut self, channel: Channel) -> &mut Vec<FieldRef> {
        match channel {
            Channel::X => &mut self.x,
            Channel::Y => &mut self.y,
            Channel::Color => &mut self.color,
            Channel::Size => &mut self.size,
            Channel::Shape => &mut self.shape,
            Channel::Opacity => &mut self.opacity,
        }
    }

    /// Every (channel, ref) pair in channel order, then declaration order.
    pub fn iter(&self) -> impl Iterator<Item = (Channel, &FieldRef)> {
        Channel::ORDER
            .into_iter()
            .flat_map(move |c| self.get(c).iter().map(move |r| (c, r)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldRef {
    pub fid: String,
    #[serde(default, skip_serializing_if = "Aggregation::is_none")]
    pub aggregation: Aggregation,
}

impl FieldRef {
    pub fn new(fid: impl Into<String>) -> FieldRef {
        FieldRef {
            fid: fid.into(),
            aggregation: Aggregation::None,
        }
    }

    pub fn agg(fid: impl Into<String>, aggregation: Aggregation) -> FieldRef {
        FieldRef {
            fid: fid.into(),
            aggregation,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    #[default]
    None,
    Sum,
    Mean,
    Count,
    Min,
    Max,
    Median,
    Variance,
    Stddev,
    CountDistinct,
}

impl Aggregation {
    pub const ALL: [Aggregation; 10] = [
        Aggregation::None,
        Aggregation::Sum,
        Aggregation::Mean,
        Aggregation::Count,
        Aggregation::Min,
        Aggregation::Max,
        Aggregation::Median,
        Aggregation::Variance,
        Aggregation::Stddev,
        Aggregation::CountDistinct,
    ];

    pub fn is_none(&self) -> bool {
        *self == Aggregation::None
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Aggregation::None => "none",
            Aggregation::Sum => "sum",
            Aggregation::Mean => "mean",
            Aggregation::Count => "count",
            Aggregation::Min => "min",
            Aggregation::Max => "max",
            Aggregation::Median => "median",
            Aggregation::Variance => "variance",
            Aggregation::Stddev => "stddev",
            Aggregation::CountDistinct => "count_distinct",
        }
    }

    /// Sum, count, min and max can be re-aggregated from finer groups.
    pub fn is_decomposable(self) -> bool {
        matches!(
            self,
            Aggregation::Sum | Aggregation::Count | Aggregation::Min | Aggregation::Max
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComputedField {
    pub out_fid: String,
    pub source_fid: String,
    pub kind: TransformKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformKind {
    Log2,
    Log10,
    /// Equal-width binning into `k` bins.
    Bin(u32),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Filter {
    pub fid: String,
    pub rule: FilterRule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterRule {
    OneOf(Vec<Scalar>),
    /// Inclusive at both ends.
    Range { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SortSpec {
    pub fid: String,
    pub direction: SortDirection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SortDirection {
    Asc,
    Desc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StackMode {
    Stack,
    Normalize,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartConfig {
    pub coord: Coord,
    pub layout: Layout,
    pub palette: String,
    /// Opaque presentation settings, preserved verbatim.
    pub style: BTreeMap<String, serde_json::Value>,
}

impl Default for ChartConfig {
    fn default() -> Self {
        ChartConfig {
            coord: Coord::Generic,
            layout: Layout::Auto,
            palette: "default".to_string(),
            style: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coord {
    Generic,
    Geographic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    Auto,
    Fixed { w: u32, h: u32 },
}

/// Parses and structurally validates a spec document.
pub fn parse_spec(json: &str) -> Result<GraphicSpec, SpecError> {
    let value: serde_json::Value =
        serde_json::from_str(json).map_err(|e| SpecError::JsonSyntax(e.to_string()))?;
    spec_from_value(value)
}

pub fn spec_from_value(value: serde_json::Value) -> Result<GraphicSpec, SpecError> {
    let object = value
        .as_object()
        .ok_or_else(|| SpecError::schema("$", "expected an object"))?;
    match object.get("version") {
        None => return Err(SpecError::schema("version", "missing field")),
        Some(v) if v.as_u64() == Some(SPEC_VERSION) => {}
        Some(v) if v.is_number() => return Err(SpecError::UnsupportedVersion(v.to_string())),
        Some(_) => return Err(SpecError::schema("version", "expected an integer")),
    }

    let spec: GraphicSpec = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        SpecError::schema(path, e.into_inner().to_string())
    })?;
    check_structure(&spec)?;
    Ok(spec)
}

fn check_structure(spec: &GraphicSpec) -> Result<(), SpecError> {
    for channel in Channel::ORDER {
        if channel.is_single_slot() && spec.channels.get(channel).len() > 1 {
            return Err(SpecError::schema(
                format!("channels.{}", channel.as_str()),
                "at most one field allowed on this channel",
            ));
        }
    }
    for (i, computed) in spec.computed.iter().enumerate() {
        if computed.kind == TransformKind::Bin(0) {
            return Err(SpecError::schema(
                format!("computed[{i}].kind.bin"),
                "bin count must be positive",
            ));
        }
        if computed.out_fid.is_empty() {
            return Err(SpecError::schema(format!("computed[{i}].out_fid"), "empty field id"));
        }
    }
    for (i, filter) in spec.filters.iter().enumerate() {
        match &filter.rule {
            FilterRule::OneOf(values) if values.is_empty() => {
                return Err(SpecError::schema(
                    format!("filters[{i}].rule.one_of"),
                    "value set must not be empty",
                ));
            }
            FilterRule::Range { lo, hi } if lo.partial_cmp(hi).is_none_or(|o| o.is_gt()) => {
                return Err(SpecError::schema(
                    format!("filters[{i}].rule.range"),
                    "lo must not exceed hi",
                ));
            }
            _ => {}
        }
    }
    if let Layout::Fixed { w, h } = spec.config.layout {
        if w == 0 || h == 0 {
            return Err(SpecError::schema("config.layout.fixed", "size must be positive"));
        }
    }
    if let Some(values) = spec.config.style.get(TABLE_VALUES_KEY) {
        serde_json::from_value::<Vec<FieldRef>>(values.clone()).map_err(|e| {
            SpecError::schema(format!("config.style.{TABLE_VALUES_KEY}"), e.to_string())
        })?;
    }
    Ok(())
}

/// Canonical text: schema field order, declaration order within lists,
/// sorted style keys, two-space indentation.
pub fn serialize_spec(spec: &GraphicSpec) -> String {
    serde_json::to_string_pretty(spec).expect("spec values always serialize")
}
