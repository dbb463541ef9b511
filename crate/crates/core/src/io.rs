//! JSON document formats for annotations and detections, plus atomic file
//! writes.
//!
//! Annotation document:
//!
//! ```json
//! {
//!   "image_id": "bar-vertical-0000",
//!   "chart_type": "bar-vertical",
//!   "plot_bb": {"x0": 56, "y0": 16, "x1": 624, "y1": 424},
//!   "x_axis": {"orientation": "horizontal", "ticks": [{"x": 90.5, "y": 424, "label": "C1", "value": null}]},
//!   "y_axis": {"orientation": "vertical", "ticks": [{"x": 55, "y": 424, "label": "0", "value": 0}], "scale": "linear"},
//!   "legends": []
//! }
//! ```
//!
//! A tick's `value` is tri-state: a number, `null` for a categorical tick, or
//! absent, in which case it is parsed from `label`.
//!
//! Detection document:
//!
//! ```json
//! {"image_id": "img", "kind": "boxes", "items": [{"box": {"x0": 1, "y0": 2, "x1": 3, "y1": 4}, "score": 1}]}
//! ```

use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoundingBox, Point2D};
use crate::model::{
    Axis, ChartAnnotation, DetectionKind, DetectionSet, Detections, LegendEntry, Orientation,
    ScaleKind, Scored, TickPoint,
};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoxDoc {
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointDoc {
    x: f64,
    y: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TickDoc {
    x: f64,
    y: f64,
    label: String,
    #[serde(default, deserialize_with = "present")]
    value: Option<Option<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AxisDoc {
    orientation: String,
    ticks: Vec<TickDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scale: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LegendDoc {
    label: String,
    patch_bb: BoxDoc,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnnotationDoc {
    image_id: String,
    chart_type: String,
    plot_bb: BoxDoc,
    x_axis: AxisDoc,
    y_axis: AxisDoc,
    legends: Vec<LegendDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ItemDoc {
    #[serde(rename = "box", default, skip_serializing_if = "Option::is_none")]
    bbox: Option<BoxDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    point: Option<PointDoc>,
    score: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DetectionDoc {
    image_id: String,
    kind: String,
    items: Vec<ItemDoc>,
}

// Distinguishes an explicit `null` from a missing key.
fn present<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Option<f64>>, D::Error> {
    Option::<f64>::deserialize(d).map(Some)
}

fn decode_doc<T: for<'de> Deserialize<'de>>(bytes: &[u8]) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    serde_path_to_error::deserialize(de)
        .map_err(|e| Error::parse(e.path().to_string(), e.inner().to_string()))
}

fn encode_doc<T: Serialize>(doc: &T) -> Result<Vec<u8>> {
    // serde_json silently writes NaN/inf as null, so check first.
    let value = serde_json::to_value(doc).map_err(|e| Error::parse("$", e.to_string()))?;
    if let Some(path) = find_null_number(&value, "$") {
        return Err(Error::invalid(path, "non-finite coordinate"));
    }
    let mut out = serde_json::to_vec_pretty(doc).map_err(|e| Error::parse("$", e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

fn find_null_number(v: &serde_json::Value, path: &str) -> Option<String> {
    use serde_json::Value;
    match v {
        Value::Object(map) => map.iter().find_map(|(k, child)| {
            let p = format!("{path}.{k}");
            // `value: null` on a tick is the categorical marker, not a number.
            if child.is_null() && k != "value" && k != "scale" {
                Some(p)
            } else {
                find_null_number(child, &p)
            }
        }),
        Value::Array(items) => items
            .iter()
            .enumerate()
            .find_map(|(i, child)| find_null_number(child, &format!("{path}[{i}]"))),
        _ => None,
    }
}

fn bbox_from(doc: &BoxDoc, field: &str) -> Result<BoundingBox> {
    BoundingBox::new(doc.x0, doc.y0, doc.x1, doc.y1).map_err(|e| Error::parse(field, e.to_string()))
}

fn point_from(doc: &PointDoc, field: &str) -> Result<Point2D> {
    Point2D::new(doc.x, doc.y).map_err(|e| Error::parse(field, e.to_string()))
}

fn box_doc(b: &BoundingBox) -> BoxDoc {
    BoxDoc {
        x0: b.x0(),
        y0: b.y0(),
        x1: b.x1(),
        y1: b.y1(),
    }
}

fn axis_from(doc: AxisDoc, field: &str) -> Result<Axis> {
    let orientation: Orientation = doc
        .orientation
        .parse()
        .map_err(|e: Error| Error::parse(format!("{field}.orientation"), e.to_string()))?;
    let scale = doc
        .scale
        .map(|s| s.parse::<ScaleKind>())
        .transpose()
        .map_err(|e| Error::parse(format!("{field}.scale"), e.to_string()))?;
    let ticks = doc
        .ticks
        .into_iter()
        .enumerate()
        .map(|(i, t)| {
            let path = format!("{field}.ticks[{i}]");
            let pixel = point_from(&PointDoc { x: t.x, y: t.y }, &path)?;
            let tick = match t.value {
                Some(value) => TickPoint::new(pixel, t.label, value),
                None => TickPoint::from_label(pixel, t.label),
            };
            tick.map_err(|e| Error::parse(path, e.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    Axis::new(orientation, ticks, scale)
        .map_err(|e| Error::parse(format!("{field}.ticks"), e.to_string()))
}

fn axis_doc(a: &Axis) -> AxisDoc {
    AxisDoc {
        orientation: a.orientation().as_str().to_string(),
        ticks: a
            .ticks()
            .iter()
            .map(|t| TickDoc {
                x: t.pixel().x(),
                y: t.pixel().y(),
                label: t.label().to_string(),
                value: Some(t.value()),
            })
            .collect(),
        scale: a.scale().map(|s| s.as_str().to_string()),
    }
}

pub fn parse_annotation(bytes: &[u8]) -> Result<ChartAnnotation> {
    let doc: AnnotationDoc = decode_doc(bytes)?;
    let chart_type = doc
        .chart_type
        .parse()
        .map_err(|e: Error| Error::parse("chart_type", e.to_string()))?;
    let plot_bb = bbox_from(&doc.plot_bb, "plot_bb")?;
    let x_axis = axis_from(doc.x_axis, "x_axis")?;
    let y_axis = axis_from(doc.y_axis, "y_axis")?;
    let legends = doc
        .legends
        .into_iter()
        .enumerate()
        .map(|(i, l)| {
            let path = format!("legends[{i}].patch_bb");
            let bb = bbox_from(&l.patch_bb, &path)?;
            LegendEntry::new(l.label, bb).map_err(|e| Error::parse(path, e.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    ChartAnnotation::new(doc.image_id, chart_type, plot_bb, x_axis, y_axis, legends)
        .map_err(|e| Error::parse("y_axis.orientation", e.to_string()))
}

pub fn serialize_annotation(a: &ChartAnnotation) -> Result<Vec<u8>> {
    encode_doc(&AnnotationDoc {
        image_id: a.image_id().to_string(),
        chart_type: a.chart_type().as_str().to_string(),
        plot_bb: box_doc(&a.plot_bb()),
        x_axis: axis_doc(a.x_axis()),
        y_axis: axis_doc(a.y_axis()),
        legends: a
            .legends()
            .iter()
            .map(|l| LegendDoc {
                label: l.label().to_string(),
                patch_bb: box_doc(&l.patch_bb()),
            })
            .collect(),
    })
}

pub fn parse_detections(bytes: &[u8]) -> Result<DetectionSet> {
    let doc: DetectionDoc = decode_doc(bytes)?;
    let kind: DetectionKind = doc
        .kind
        .parse()
        .map_err(|e: Error| Error::parse("kind", e.to_string()))?;
    let mismatch = |i: usize| {
        Error::parse(
            format!("items[{i}]"),
            format!("item payload does not match kind {:?}", kind.as_str()),
        )
    };
    let score = |i: usize, item, s: f64| {
        Scored::new(item, s).map_err(|e| Error::parse(format!("items[{i}].score"), e.to_string()))
    };
    let detections = match kind {
        DetectionKind::Boxes => Detections::Boxes(
            doc.items
                .iter()
                .enumerate()
                .map(|(i, it)| match (&it.bbox, &it.point) {
                    (Some(b), None) => {
                        score(i, bbox_from(b, &format!("items[{i}].box"))?, it.score)
                    }
                    _ => Err(mismatch(i)),
                })
                .collect::<Result<Vec<_>>>()?,
        ),
        DetectionKind::Points => Detections::Points(
            doc.items
                .iter()
                .enumerate()
                .map(|(i, it)| match (&it.bbox, &it.point) {
                    (None, Some(p)) => {
                        let p = point_from(p, &format!("items[{i}].point"))?;
                        Scored::new(p, it.score)
                            .map_err(|e| Error::parse(format!("items[{i}].score"), e.to_string()))
                    }
                    _ => Err(mismatch(i)),
                })
                .collect::<Result<Vec<_>>>()?,
        ),
    };
    Ok(DetectionSet::new(doc.image_id, detections))
}

pub fn serialize_detections(d: &DetectionSet) -> Result<Vec<u8>> {
    let items = match d.detections() {
        Detections::Boxes(b) => b
            .iter()
            .map(|s| ItemDoc {
                bbox: Some(box_doc(s.item())),
                point: None,
                score: s.score(),
            })
            .collect(),
        Detections::Points(p) => p
            .iter()
            .map(|s| ItemDoc {
                bbox: None,
                point: Some(PointDoc {
                    x: s.item().x(),
                    y: s.item().y(),
                }),
                score: s.score(),
            })
            .collect(),
    };
    encode_doc(&DetectionDoc {
        image_id: d.image_id().to_string(),
        kind: d.kind().as_str().to_string(),
        items,
    })
}

/// Writes `bytes` to a temporary file next to `path` and renames it into
/// place, so readers never observe a partially written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    use std::io::Write;
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ChartType;
    use proptest::prelude::*;

    const MINIMAL_BAR: &str = r#"{
        "image_id": "img-1",
        "chart_type": "bar-vertical",
        "plot_bb": {"x0": 50, "y0": 20, "x1": 300, "y1": 200},
        "x_axis": {"orientation": "horizontal", "ticks": [{"x": 100, "y": 200, "label": "A"}]},
        "y_axis": {"orientation": "vertical", "ticks": [
            {"x": 50, "y": 200, "label": "0"},
            {"x": 50, "y": 100, "label": "10"}
        ]},
        "legends": []
    }"#;

    #[test]
    fn minimal_bar_annotation() {
        let a = parse_annotation(MINIMAL_BAR.as_bytes()).unwrap();
        assert_eq!(a.chart_type(), ChartType::BarVertical);
        let vals: Vec<_> = a.y_axis().ticks().iter().map(|t| t.value()).collect();
        assert_eq!(vals, vec![Some(0.0), Some(10.0)]);
        assert_eq!(a.x_axis().ticks()[0].value(), None);
    }

    #[test]
    fn scientific_label_parses() {
        let doc = MINIMAL_BAR.replace("\"label\": \"10\"", "\"label\": \"1e3\"");
        let a = parse_annotation(doc.as_bytes()).unwrap();
        assert_eq!(a.y_axis().ticks()[1].value(), Some(1000.0));
    }

    #[test]
    fn duplicate_tick_pixels_name_the_field() {
        let doc = MINIMAL_BAR.replace("\"y\": 100", "\"y\": 200");
        let err = parse_annotation(doc.as_bytes()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("y_axis.ticks"), "{msg}");
        assert!(msg.contains("ticks not strictly monotone"), "{msg}");
    }

    #[test]
    fn malformed_documents_name_the_field() {
        let doc = MINIMAL_BAR.replace("\"x0\": 50,", "\"x0\": \"fifty\",");
        let msg = parse_annotation(doc.as_bytes()).unwrap_err().to_string();
        assert!(msg.contains("plot_bb.x0"), "{msg}");

        let doc = MINIMAL_BAR.replace("bar-vertical", "pie");
        let msg = parse_annotation(doc.as_bytes()).unwrap_err().to_string();
        assert!(msg.contains("chart_type"), "{msg}");

        assert!(parse_annotation(b"{").is_err());
    }

    #[test]
    fn empty_legends_serialized_explicitly() {
        let a = parse_annotation(MINIMAL_BAR.as_bytes()).unwrap();
        let text = String::from_utf8(serialize_annotation(&a).unwrap()).unwrap();
        assert!(text.contains("\"legends\": []"), "{text}");
        assert_eq!(parse_annotation(text.as_bytes()).unwrap(), a);
    }

    #[test]
    fn explicit_null_value_keeps_numeric_label_categorical() {
        let doc = MINIMAL_BAR.replace(
            "{\"x\": 100, \"y\": 200, \"label\": \"A\"}",
            "{\"x\": 100, \"y\": 200, \"label\": \"2019\", \"value\": null}",
        );
        let a = parse_annotation(doc.as_bytes()).unwrap();
        assert_eq!(a.x_axis().ticks()[0].value(), None);
        let again = parse_annotation(&serialize_annotation(&a).unwrap()).unwrap();
        assert_eq!(again, a);
    }

    #[test]
    fn non_finite_coordinate_refused() {
        let doc = DetectionDoc {
            image_id: "x".into(),
            kind: "points".into(),
            items: vec![ItemDoc {
                bbox: None,
                point: Some(PointDoc {
                    x: f64::NAN,
                    y: 1.0,
                }),
                score: 0.5,
            }],
        };
        let err = encode_doc(&doc).unwrap_err();
        assert!(err.to_string().contains("non-finite"), "{err}");

        let d = DetectionSet::points(
            "x",
            vec![Scored::new(Point2D::raw(f64::INFINITY, 0.0), 1.0).unwrap()],
        );
        assert!(serialize_detections(&d).is_err());
    }

    #[test]
    fn three_boxes() {
        let doc = r#"{"image_id":"i","kind":"boxes","items":[
            {"box":{"x0":0,"y0":0,"x1":1,"y1":1},"score":0.9},
            {"box":{"x0":2,"y0":0,"x1":3,"y1":1},"score":0.5},
            {"box":{"x0":4,"y0":0,"x1":5,"y1":1},"score":1}]}"#;
        let d = parse_detections(doc.as_bytes()).unwrap();
        assert_eq!(d.kind(), DetectionKind::Boxes);
        assert_eq!(d.len(), 3);
    }

    #[test]
    fn detection_errors() {
        let bad_score =
            r#"{"image_id":"i","kind":"points","items":[{"point":{"x":1,"y":1},"score":1.2}]}"#;
        let msg = parse_detections(bad_score.as_bytes())
            .unwrap_err()
            .to_string();
        assert!(msg.contains("score out of range"), "{msg}");

        let mismatch =
            r#"{"image_id":"i","kind":"boxes","items":[{"point":{"x":1,"y":1},"score":1}]}"#;
        let msg = parse_detections(mismatch.as_bytes())
            .unwrap_err()
            .to_string();
        assert!(msg.contains("does not match kind"), "{msg}");
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/out.json");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"two");
        assert_eq!(
            std::fs::read_dir(path.parent().unwrap()).unwrap().count(),
            1
        );
    }

    fn arb_detections() -> impl Strategy<Value = DetectionSet> {
        let coord = -1e6f64..1e6;
        let score = 0.0f64..=1.0;
        prop_oneof![
            prop::collection::vec(
                (
                    coord.clone(),
                    coord.clone(),
                    0.0f64..500.0,
                    0.0f64..500.0,
                    score.clone()
                ),
                0..20
            )
            .prop_map(|v| DetectionSet::boxes(
                "boxes-img",
                v.into_iter()
                    .map(|(x, y, w, h, s)| {
                        Scored::new(BoundingBox::new(x, y, x + w, y + h).unwrap(), s).unwrap()
                    })
                    .collect()
            )),
            prop::collection::vec((coord.clone(), coord, score), 0..20).prop_map(|v| {
                DetectionSet::points(
                    "points-img",
                    v.into_iter()
                        .map(|(x, y, s)| Scored::new(Point2D::new(x, y).unwrap(), s).unwrap())
                        .collect(),
                )
            }),
        ]
    }

    proptest! {
        #[test]
        fn detections_round_trip(d in arb_detections()) {
            let bytes = serialize_detections(&d).unwrap();
            prop_assert_eq!(parse_detections(&bytes).unwrap(), d);
        }
    }
}
