//! Binary records for series and spans, and an on-disk series cache.
//!
//! Record layout (all integers little-endian):
//!
//! ```text
//! magic "PTWR" | version u32 | payload u32 | ell u32 | m u32 | body | sha256(everything before)
//! ```
//!
//! A series body is `offset24 i64, step24 i64, prec24 i64, len u64, len × u32`.
//! A span body is `start24 i64, step24 i64, ncols u64, nrows u64, nrows·ncols × u32`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::{howell, ModuleSpan, Window};
use crate::partitions::{base_level, extend_levels, tower_plan, Tower, TowerKind};
use crate::ring::RingSpec;
use crate::series::ResidueSeries;

pub const MAGIC: &[u8; 4] = b"PTWR";
pub const FORMAT_VERSION: u32 = 1;
const HEADER: usize = 20;
const DIGEST: usize = 32;

const PAYLOAD_SERIES: u32 = 0;
const PAYLOAD_SPAN: u32 = 1;

fn header(payload: u32, ring: RingSpec) -> Vec<u8> {
    let mut out = Vec::with_capacity(64);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&payload.to_le_bytes());
    out.extend_from_slice(&ring.ell().to_le_bytes());
    out.extend_from_slice(&ring.m().to_le_bytes());
    out
}

fn seal(mut out: Vec<u8>) -> Vec<u8> {
    let digest = Sha256::digest(&out);
    out.extend_from_slice(&digest);
    out
}

pub fn encode_series(s: &ResidueSeries) -> Vec<u8> {
    let mut out = header(PAYLOAD_SERIES, s.ring());
    out.extend_from_slice(&s.offset24().to_le_bytes());
    out.extend_from_slice(&s.step24().to_le_bytes());
    out.extend_from_slice(&s.prec24().to_le_bytes());
    out.extend_from_slice(&(s.len() as u64).to_le_bytes());
    for c in s.coeffs() {
        out.extend_from_slice(&c.to_le_bytes());
    }
    seal(out)
}

pub fn encode_span(span: &ModuleSpan) -> Vec<u8> {
    let mut out = header(PAYLOAD_SPAN, span.ring);
    out.extend_from_slice(&span.window.start24.to_le_bytes());
    out.extend_from_slice(&span.window.step24.to_le_bytes());
    out.extend_from_slice(&(span.window.len as u64).to_le_bytes());
    out.extend_from_slice(&(span.rows.len() as u64).to_le_bytes());
    for row in &span.rows {
        for c in row {
            out.extend_from_slice(&c.to_le_bytes());
        }
    }
    seal(out)
}

/// Sequential little-endian reader over a verified body.
struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let end = self.pos + N;
        let bytes = self
            .buf
            .get(self.pos..end)
            .ok_or_else(|| Error::CorruptCache("record body is truncated".into()))?;
        self.pos = end;
        Ok(bytes.try_into().expect("slice of length N"))
    }

    fn u32(&mut self) -> Result<u32> {
        self.take::<4>().map(u32::from_le_bytes)
    }

    fn i64(&mut self) -> Result<i64> {
        self.take::<8>().map(i64::from_le_bytes)
    }

    fn u64(&mut self) -> Result<u64> {
        self.take::<8>().map(u64::from_le_bytes)
    }

    fn words(&mut self, n: u64) -> Result<Vec<u32>> {
        let remaining = (self.buf.len() - self.pos) / 4;
        if n > remaining as u64 {
            return Err(Error::CorruptCache(format!("declared {n} words, only {remaining} present")));
        }
        (0..n).map(|_| self.u32()).collect()
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(Error::CorruptCache("trailing bytes after record body".into()));
        }
        Ok(())
    }
}

/// Checks magic, version and digest; returns the payload tag, ring and body.
fn open(bytes: &[u8]) -> Result<(u32, RingSpec, &[u8])> {
    if bytes.len() < 8 || &bytes[..4] != MAGIC {
        return Err(Error::CorruptCache("missing record magic".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    if version != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion { found: version, expected: FORMAT_VERSION });
    }
    if bytes.len() < HEADER + DIGEST {
        return Err(Error::CorruptCache(format!("record is only {} bytes", bytes.len())));
    }
    let (content, digest) = bytes.split_at(bytes.len() - DIGEST);
    if Sha256::digest(content).as_slice() != digest {
        return Err(Error::CorruptCache("integrity hash mismatch".into()));
    }
    let mut c = Cursor { buf: &content[8..HEADER], pos: 0 };
    let payload = c.u32()?;
    let ell = c.u32()?;
    let m = c.u32()?;
    let ring = RingSpec::new(ell, m).map_err(|e| Error::CorruptCache(format!("bad ring in header: {e}")))?;
    Ok((payload, ring, &content[HEADER..]))
}

pub fn decode_series(bytes: &[u8]) -> Result<ResidueSeries> {
    let (payload, ring, body) = open(bytes)?;
    if payload != PAYLOAD_SERIES {
        return Err(Error::CorruptCache(format!("expected a series record, found payload {payload}")));
    }
    let mut c = Cursor { buf: body, pos: 0 };
    let offset24 = c.i64()?;
    let step24 = c.i64()?;
    let prec24 = c.i64()?;
    let len = c.u64()?;
    let coeffs = c.words(len)?;
    c.finish()?;
    ResidueSeries::new(ring, offset24, step24, coeffs, prec24).map_err(|e| Error::CorruptCache(e.to_string()))
}

pub fn decode_span(bytes: &[u8]) -> Result<ModuleSpan> {
    let (payload, ring, body) = open(bytes)?;
    if payload != PAYLOAD_SPAN {
        return Err(Error::CorruptCache(format!("expected a span record, found payload {payload}")));
    }
    let mut c = Cursor { buf: body, pos: 0 };
    let start24 = c.i64()?;
    let step24 = c.i64()?;
    let ncols = c.u64()? as usize;
    let nrows = c.u64()?;
    let flat = c.words(nrows.saturating_mul(ncols as u64))?;
    c.finish()?;
    if flat.iter().any(|&x| x >= ring.modulus()) {
        return Err(Error::CorruptCache("span entry not reduced".into()));
    }
    let rows: Vec<Vec<u32>> = if ncols == 0 { Vec::new() } else { flat.chunks(ncols).map(<[u32]>::to_vec).collect() };
    Ok(howell(&rows, ring, Window { start24, len: ncols, step24 }))
}

/// Identifies one cached tower level.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CacheKey {
    pub kind: String,
    pub ell: u32,
    pub m: u32,
    pub b: u32,
    pub prec24: i64,
}

impl CacheKey {
    pub fn new(kind: TowerKind, ring: RingSpec, b: u32, prec24: i64) -> Self {
        CacheKey { kind: kind.tag(), ell: ring.ell(), m: ring.m(), b, prec24 }
    }

    fn stem(&self) -> String {
        format!("{}-l{}-m{}-b{}-p{}", self.kind, self.ell, self.m, self.b, self.prec24)
    }

    fn parse(stem: &str) -> Option<Self> {
        let mut parts = stem.split('-');
        let kind = parts.next()?.to_string();
        let mut field = |tag: char| parts.next().and_then(|p| p.strip_prefix(tag)).map(str::to_string);
        let ell = field('l')?.parse().ok()?;
        let m = field('m')?.parse().ok()?;
        let b = field('b')?.parse().ok()?;
        let prec24 = field('p')?.parse().ok()?;
        Some(CacheKey { kind, ell, m, b, prec24 })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub key: CacheKey,
    pub bytes: u64,
}

/// Directory of series records, one file per tower level, each with a JSON mirror.
#[derive(Debug, Clone)]
pub struct SeriesCache {
    dir: PathBuf,
}

const EXT: &str = "ptw";

impl SeriesCache {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(SeriesCache { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, key: &CacheKey) -> PathBuf {
        self.dir.join(format!("{}.{EXT}", key.stem()))
    }

    fn mirror(&self, key: &CacheKey) -> PathBuf {
        self.dir.join(format!("{}.json", key.stem()))
    }

    /// Writes both files via temp-file-then-rename.
    pub fn put(&self, key: &CacheKey, s: &ResidueSeries) -> Result<()> {
        atomic_write(&self.path(key), &encode_series(s))?;
        let json = serde_json::to_vec_pretty(s).map_err(|e| Error::Io(e.to_string()))?;
        atomic_write(&self.mirror(key), &json)
    }

    /// The cached series, `None` if absent. A damaged file is an error.
    pub fn get(&self, key: &CacheKey) -> Result<Option<ResidueSeries>> {
        match fs::read(self.path(key)) {
            Ok(bytes) => decode_series(&bytes).map(Some),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    /// All well-named records, sorted by key.
    pub fn ls(&self) -> Result<Vec<CacheEntry>> {
        let mut out = Vec::new();
        for entry in fs::read_dir(&self.dir)? {
            let entry = entry?;
            let path = entry.path();
            if path.extension().and_then(|e| e.to_str()) != Some(EXT) {
                continue;
            }
            let Some(key) = path.file_stem().and_then(|s| s.to_str()).and_then(CacheKey::parse) else {
                continue;
            };
            out.push(CacheEntry { key, bytes: entry.metadata()?.len() });
        }
        out.sort_by(|a, b| a.key.cmp(&b.key));
        Ok(out)
    }

    /// The most precise cached level for (kind, ring, b) with at least `min_prec24`.
    pub fn best(&self, kind: TowerKind, ring: RingSpec, b: u32, min_prec24: i64) -> Result<Option<ResidueSeries>> {
        let tag = kind.tag();
        let mut candidates: Vec<CacheKey> = self
            .ls()?
            .into_iter()
            .map(|e| e.key)
            .filter(|k| k.kind == tag && k.ell == ring.ell() && k.m == ring.m() && k.b == b && k.prec24 >= min_prec24)
            .collect();
        candidates.sort_by_key(|k| k.prec24);
        match candidates.first() {
            Some(k) => self.get(k),
            None => Ok(None),
        }
    }

    /// Removes leftover temp files, unreadable records, orphaned mirrors and
    /// records superseded by a more precise copy of the same level.
    /// Returns the removed paths.
    pub fn gc(&self) -> Result<Vec<PathBuf>> {
        let mut removed = Vec::new();
        let mut live = Vec::new();
        for entry in fs::read_dir(&self.dir)? {
            let path = entry?.path();
            let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default().to_string();
            if name.starts_with('.') && name.contains(".tmp") {
                fs::remove_file(&path)?;
                removed.push(path);
                continue;
            }
            if path.extension().and_then(|e| e.to_str()) != Some(EXT) {
                continue;
            }
            let key = path.file_stem().and_then(|s| s.to_str()).and_then(CacheKey::parse);
            let ok = fs::read(&path).ok().map(|b| decode_series(&b).is_ok()).unwrap_or(false);
            match key {
                Some(k) if ok => live.push(k),
                _ => {
                    fs::remove_file(&path)?;
                    removed.push(path);
                }
            }
        }
        live.sort();
        let mut keep: Vec<CacheKey> = Vec::new();
        for k in live {
            let superseded = |other: &CacheKey| {
                other.kind == k.kind && other.ell == k.ell && other.m == k.m && other.b == k.b
            };
            if let Some(last) = keep.last_mut().filter(|o| superseded(o)) {
                let stale = std::mem::replace(last, k);
                let path = self.path(&stale);
                fs::remove_file(&path)?;
                removed.push(path);
            } else {
                keep.push(k);
            }
        }
        for entry in fs::read_dir(&self.dir)? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            let key = path.file_stem().and_then(|s| s.to_str()).and_then(CacheKey::parse);
            if !key.is_some_and(|k| keep.contains(&k)) {
                fs::remove_file(&path)?;
                removed.push(path);
            }
        }
        removed.sort();
        Ok(removed)
    }
}

fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("record");
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// [`build_tower`](crate::partitions::build_tower) backed by a cache: the run
/// resumes from the deepest level that is cached, together with every level
/// below it, at the planned precision. New levels are written back.
pub fn build_tower_cached(
    cache: &SeriesCache,
    kind: TowerKind,
    ring: RingSpec,
    b_max: u32,
    target_prec24: i64,
) -> Result<Tower> {
    kind.validate(ring)?;
    let base = kind.base_level();
    if b_max < base {
        return Err(Error::Invalid(format!("tower for {kind} starts at level {base}")));
    }
    let plan = tower_plan(kind, ring, b_max, target_prec24);
    let need = |b: u32| plan.levels[(b - base) as usize];
    let mut have = Vec::new();
    for b in base..=b_max {
        match cache.best(kind, ring, b, need(b))? {
            Some(s) => have.push(s.truncate(need(b))?),
            None => break,
        }
    }
    let (b0, start) = match have.pop() {
        Some(s) => (base + have.len() as u32, s),
        None => {
            let s = base_level(kind, ring, plan.input())?;
            cache.put(&CacheKey::new(kind, ring, base, s.prec24()), &s)?;
            (base, s)
        }
    };
    let rest = extend_levels(kind, ring, &plan, b0, start, |b, s| cache.put(&CacheKey::new(kind, ring, b, s.prec24()), s))?;
    have.extend(rest);
    Ok(Tower::from_levels(kind, ring, plan, have))
}
