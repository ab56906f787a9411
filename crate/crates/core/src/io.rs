//! File formats.
//!
//! - domain JSON: `{"name": .., "intervals": [..]}` where each entry is
//!   either `{"x","y","a","b","c","d"}` or `{"mins": [[x, y], ..], "maxs": [..]}`
//! - barcode JSON: `{"bars": [{"mins": .., "maxs": .., "mult": k}, ..]}`
//! - diagram CSV `x,y,a,b,c,d,mult`, distance matrix CSV `r,s,eps`, loss
//!   trace CSV `epoch,loss,seconds`
//! - time series CSV: one series per row, label first, a blank cell ends it
//!
//! Floats are written in shortest round-trip form, so reading back a written
//! file reproduces every value bitwise.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::erosion::EpsilonMatrix;
use crate::error::{Error, Result};
use crate::geometry::{Domain, DomainIntervals, IntervalVec6, PQInterval, Point2};
use crate::gpd::{Bar, Barcode, GpdPointCloud};
use crate::optim::LossTrace;
use crate::pipeline::TimeSeries;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Vec6Entry {
    x: f64,
    y: f64,
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PQEntry {
    mins: Vec<[f64; 2]>,
    maxs: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum IntervalEntry {
    Vec6(Vec6Entry),
    PQ(PQEntry),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DomainFile {
    #[serde(default)]
    name: String,
    intervals: Vec<IntervalEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BarEntry {
    mins: Vec<[f64; 2]>,
    maxs: Vec<[f64; 2]>,
    mult: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BarcodeFile {
    bars: Vec<BarEntry>,
}

fn points(raw: &[[f64; 2]]) -> Vec<Point2> {
    raw.iter().map(|&p| p.into()).collect()
}

fn raw_points(p: &[Point2]) -> Vec<[f64; 2]> {
    p.iter().map(|&p| p.into()).collect()
}

/// Validation failures inside a well-formed file are format violations.
fn format_err(what: &str, e: Error) -> Error {
    match e {
        Error::Io(_) | Error::Json(_) | Error::Csv(_) | Error::Format(_) => e,
        other => Error::Format(format!("{what}: {other}")),
    }
}

pub fn domain_from_reader(r: impl Read) -> Result<Domain> {
    let file: DomainFile = serde_json::from_reader(r)?;
    let all_vec6 = file
        .intervals
        .iter()
        .all(|e| matches!(e, IntervalEntry::Vec6(_)));
    let build = || -> Result<Domain> {
        if all_vec6 {
            let v = file
                .intervals
                .iter()
                .map(|e| match e {
                    IntervalEntry::Vec6(v) => IntervalVec6::new(v.x, v.y, v.a, v.b, v.c, v.d),
                    IntervalEntry::PQ(_) => unreachable!(),
                })
                .collect::<Result<Vec<_>>>()?;
            Domain::from_vec6(file.name.clone(), v)
        } else {
            let v = file
                .intervals
                .iter()
                .map(|e| match e {
                    IntervalEntry::Vec6(v) => {
                        IntervalVec6::new(v.x, v.y, v.a, v.b, v.c, v.d)?.decode()
                    }
                    IntervalEntry::PQ(p) => PQInterval::new(points(&p.mins), points(&p.maxs)),
                })
                .collect::<Result<Vec<_>>>()?;
            Domain::from_intervals(file.name.clone(), v)
        }
    };
    build().map_err(|e| format_err("domain", e))
}

pub fn domain_to_writer(domain: &Domain, w: impl Write) -> Result<()> {
    let intervals = match domain.kind() {
        DomainIntervals::Vec6(v) => v
            .iter()
            .map(|v| {
                let [x, y, a, b, c, d] = v.to_array();
                IntervalEntry::Vec6(Vec6Entry { x, y, a, b, c, d })
            })
            .collect(),
        DomainIntervals::General(v) => v
            .iter()
            .map(|iv| {
                IntervalEntry::PQ(PQEntry {
                    mins: raw_points(iv.mins()),
                    maxs: raw_points(iv.maxs()),
                })
            })
            .collect(),
    };
    serde_json::to_writer(
        w,
        &DomainFile {
            name: domain.name.clone(),
            intervals,
        },
    )?;
    Ok(())
}

pub fn barcode_from_reader(r: impl Read) -> Result<Barcode> {
    let file: BarcodeFile = serde_json::from_reader(r)?;
    let bars = file
        .bars
        .iter()
        .map(|b| {
            Ok(Bar {
                interval: PQInterval::new(points(&b.mins), points(&b.maxs))?,
                mult: b.mult,
            })
        })
        .collect::<Result<Vec<_>>>()
        .and_then(Barcode::new);
    bars.map_err(|e| format_err("barcode", e))
}

pub fn barcode_to_writer(barcode: &Barcode, w: impl Write) -> Result<()> {
    let bars = barcode
        .bars()
        .iter()
        .map(|b| BarEntry {
            mins: raw_points(b.interval.mins()),
            maxs: raw_points(b.interval.maxs()),
            mult: b.mult,
        })
        .collect();
    serde_json::to_writer(w, &BarcodeFile { bars })?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct GpdRow {
    x: f64,
    y: f64,
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    mult: i64,
}

pub fn gpd_to_writer(cloud: &GpdPointCloud, w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    if cloud.points.is_empty() {
        out.write_record(["x", "y", "a", "b", "c", "d", "mult"])?;
    }
    for (p, mult) in &cloud.points {
        let [x, y, a, b, c, d] = p.to_array();
        out.serialize(GpdRow {
            x,
            y,
            a,
            b,
            c,
            d,
            mult: *mult,
        })?;
    }
    out.flush()?;
    Ok(())
}

pub fn gpd_from_reader(r: impl Read) -> Result<GpdPointCloud> {
    let mut rdr = csv::Reader::from_reader(r);
    expect_header(&mut rdr, &["x", "y", "a", "b", "c", "d", "mult"])?;
    let mut points = Vec::new();
    for row in rdr.deserialize() {
        let row: GpdRow = row?;
        let v = IntervalVec6::new(row.x, row.y, row.a, row.b, row.c, row.d)
            .map_err(|e| format_err("diagram", e))?;
        points.push((v, row.mult));
    }
    Ok(GpdPointCloud { points })
}

#[derive(Serialize, Deserialize)]
struct MatrixRow {
    r: usize,
    s: usize,
    eps: f64,
}

pub fn matrix_to_writer(m: &EpsilonMatrix, w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in 0..m.rows() {
        for s in 0..m.cols() {
            out.serialize(MatrixRow {
                r,
                s,
                eps: m.get(r, s),
            })?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn matrix_from_reader(r: impl Read) -> Result<EpsilonMatrix> {
    let mut rdr = csv::Reader::from_reader(r);
    expect_header(&mut rdr, &["r", "s", "eps"])?;
    let rows: Vec<MatrixRow> = rdr.deserialize().collect::<std::result::Result<_, _>>()?;
    let n = rows.iter().map(|x| x.r + 1).max().unwrap_or(0);
    let m = rows.iter().map(|x| x.s + 1).max().unwrap_or(0);
    if rows.len() != n * m || rows.iter().enumerate().any(|(k, x)| x.r * m + x.s != k) {
        return Err(Error::Format(
            "matrix rows must be complete and row-major".into(),
        ));
    }
    EpsilonMatrix::from_entries(n, m, rows.into_iter().map(|x| x.eps).collect())
        .map_err(|e| format_err("matrix", e))
}

#[derive(Serialize, Deserialize)]
struct TraceRow {
    epoch: usize,
    loss: f64,
    seconds: f64,
}

pub fn trace_to_writer(trace: &LossTrace, w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for (epoch, (&loss, &seconds)) in trace.losses.iter().zip(&trace.seconds).enumerate() {
        out.serialize(TraceRow {
            epoch,
            loss,
            seconds,
        })?;
    }
    out.flush()?;
    Ok(())
}

pub fn trace_from_reader(r: impl Read) -> Result<LossTrace> {
    let mut rdr = csv::Reader::from_reader(r);
    expect_header(&mut rdr, &["epoch", "loss", "seconds"])?;
    let mut trace = LossTrace::default();
    for (k, row) in rdr.deserialize().enumerate() {
        let row: TraceRow = row?;
        if row.epoch != k {
            return Err(Error::Format(format!(
                "trace epoch {} out of order",
                row.epoch
            )));
        }
        trace.losses.push(row.loss);
        trace.seconds.push(row.seconds);
    }
    Ok(trace)
}

fn expect_header<R: Read>(rdr: &mut csv::Reader<R>, want: &[&str]) -> Result<()> {
    let got = rdr.headers()?;
    if got.iter().ne(want.iter().copied()) {
        return Err(Error::Format(format!(
            "expected header {}, found {}",
            want.join(","),
            got.iter().collect::<Vec<_>>().join(",")
        )));
    }
    Ok(())
}

pub fn time_series_from_reader(r: impl Read) -> Result<Vec<TimeSeries>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(r);
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let mut cells = rec.iter();
        let Some(label) = cells.next() else { continue };
        let samples = cells
            .map(str::trim)
            .take_while(|c| !c.is_empty())
            .map(|c| {
                c.parse::<f64>()
                    .map_err(|_| Error::Format(format!("row {}: bad sample {c:?}", line + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(TimeSeries {
            label: label.to_string(),
            samples,
        });
    }
    Ok(out)
}

pub fn time_series_to_writer(series: &[TimeSeries], w: impl Write) -> Result<()> {
    let mut out = csv::WriterBuilder::new().flexible(true).from_writer(w);
    for s in series {
        let mut row = vec![s.label.clone()];
        row.extend(s.samples.iter().map(f64::to_string));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path)?))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

pub fn read_domain(path: impl AsRef<Path>) -> Result<Domain> {
    domain_from_reader(open(path.as_ref())?)
}

pub fn write_domain(path: impl AsRef<Path>, domain: &Domain) -> Result<()> {
    let mut w = create(path.as_ref())?;
    domain_to_writer(domain, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn read_barcode(path: impl AsRef<Path>) -> Result<Barcode> {
    barcode_from_reader(open(path.as_ref())?)
}

pub fn write_barcode(path: impl AsRef<Path>, barcode: &Barcode) -> Result<()> {
    let mut w = create(path.as_ref())?;
    barcode_to_writer(barcode, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn read_gpd(path: impl AsRef<Path>) -> Result<GpdPointCloud> {
    gpd_from_reader(open(path.as_ref())?)
}

pub fn write_gpd(path: impl AsRef<Path>, cloud: &GpdPointCloud) -> Result<()> {
    gpd_to_writer(cloud, create(path.as_ref())?)
}

pub fn write_matrix(path: impl AsRef<Path>, m: &EpsilonMatrix) -> Result<()> {
    matrix_to_writer(m, create(path.as_ref())?)
}

pub fn read_trace(path: impl AsRef<Path>) -> Result<LossTrace> {
    trace_from_reader(open(path.as_ref())?)
}

pub fn write_trace(path: impl AsRef<Path>, trace: &LossTrace) -> Result<()> {
    trace_to_writer(trace, create(path.as_ref())?)
}

pub fn read_time_series(path: impl AsRef<Path>) -> Result<Vec<TimeSeries>> {
    time_series_from_reader(open(path.as_ref())?)
}

/// Per-axis affine map sending a bounding box onto `[0, 1]^2`. An axis of
/// zero extent is only translated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisMap {
    pub origin: Point2,
    pub scale: Point2,
}

impl AxisMap {
    pub fn fit(lo: Point2, hi: Point2) -> AxisMap {
        let s = |lo: f64, hi: f64| if hi > lo { 1.0 / (hi - lo) } else { 1.0 };
        AxisMap {
            origin: lo,
            scale: Point2::new(s(lo.x, hi.x), s(lo.y, hi.y)),
        }
    }

    pub fn for_domain(domain: &Domain) -> Result<AxisMap> {
        let (lo, hi) = bbox(domain.intervals()?.iter())?;
        Ok(AxisMap::fit(lo, hi))
    }

    pub fn for_barcode(barcode: &Barcode) -> Result<AxisMap> {
        let (lo, hi) = bbox(barcode.bars().iter().map(|b| &b.interval))?;
        Ok(AxisMap::fit(lo, hi))
    }

    fn point(&self, p: &Point2) -> Point2 {
        Point2::new(
            (p.x - self.origin.x) * self.scale.x,
            (p.y - self.origin.y) * self.scale.y,
        )
    }

    pub fn interval(&self, iv: &PQInterval) -> Result<PQInterval> {
        PQInterval::new(
            iv.mins().iter().map(|p| self.point(p)).collect(),
            iv.maxs().iter().map(|p| self.point(p)).collect(),
        )
    }

    pub fn domain(&self, domain: &Domain) -> Result<Domain> {
        match domain.kind() {
            DomainIntervals::Vec6(v) => {
                let (sx, sy) = (self.scale.x, self.scale.y);
                let mapped = v
                    .iter()
                    .map(|v| {
                        let [x, y, a, b, c, d] = v.to_array();
                        let p = self.point(&Point2::new(x, y));
                        IntervalVec6::new(p.x, p.y, a * sy, b * sx, c * sy, d * sx)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Domain::from_vec6(domain.name.clone(), mapped)
            }
            DomainIntervals::General(v) => Domain::from_intervals(
                domain.name.clone(),
                v.iter()
                    .map(|iv| self.interval(iv))
                    .collect::<Result<Vec<_>>>()?,
            ),
        }
    }

    pub fn barcode(&self, barcode: &Barcode) -> Result<Barcode> {
        Barcode::new(
            barcode
                .bars()
                .iter()
                .map(|b| {
                    Ok(Bar {
                        interval: self.interval(&b.interval)?,
                        mult: b.mult,
                    })
                })
                .collect::<Result<Vec<_>>>()?,
        )
    }
}

fn bbox<'a>(intervals: impl Iterator<Item = &'a PQInterval>) -> Result<(Point2, Point2)> {
    let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for iv in intervals {
        let (l, h) = iv.bounding_box();
        lo = Point2::new(lo.x.min(l.x), lo.y.min(l.y));
        hi = Point2::new(hi.x.max(h.x), hi.y.max(h.y));
    }
    if !lo.is_finite() {
        return Err(Error::EmptyDomain);
    }
    Ok((lo, hi))
}
