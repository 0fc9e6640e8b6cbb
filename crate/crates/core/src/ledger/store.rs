use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufReader, ErrorKind, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use super::{LedgerClient, LedgerError, LedgerRecord};
use crate::identity::{canonical_json, DidMethodId};

/// Append-only record log with an in-memory index of every id's history.
///
/// The log is a sequence of 4-byte big-endian length prefixes, each followed
/// by one canonical-JSON record. Opening replays and re-validates the log.
#[derive(Debug)]
pub struct LedgerStore {
    method: DidMethodId,
    index: RwLock<HashMap<String, Vec<LedgerRecord>>>,
    log: Mutex<Option<File>>,
    path: Option<PathBuf>,
}

impl LedgerStore {
    pub fn in_memory(method: DidMethodId) -> Self {
        LedgerStore { method, index: RwLock::default(), log: Mutex::new(None), path: None }
    }

    /// Opens or creates the log at `path`. A log that fails to replay
    /// (truncated frame, bad JSON, broken continuity) is refused.
    pub fn open(path: &Path, method: DidMethodId) -> Result<Self, LedgerError> {
        let store = LedgerStore::in_memory(method);
        match File::open(path) {
            Ok(f) => {
                let mut r = BufReader::new(f);
                let mut offset = 0u64;
                loop {
                    let mut len = [0u8; 4];
                    match r.read_exact(&mut len) {
                        Ok(()) => {}
                        Err(e) if e.kind() == ErrorKind::UnexpectedEof => break,
                        Err(e) => return Err(LedgerError::Io(e.to_string())),
                    }
                    let mut body = vec![0u8; u32::from_be_bytes(len) as usize];
                    r.read_exact(&mut body)
                        .map_err(|_| LedgerError::Corrupt(format!("truncated record at offset {offset}")))?;
                    let record: LedgerRecord = serde_json::from_slice(&body)
                        .map_err(|e| LedgerError::Corrupt(format!("record at offset {offset}: {e}")))?;
                    store
                        .insert_checked(record)
                        .map_err(|e| LedgerError::Corrupt(format!("record at offset {offset}: {e}")))?;
                    offset += 4 + body.len() as u64;
                }
            }
            Err(e) if e.kind() == ErrorKind::NotFound => {}
            Err(e) => return Err(LedgerError::Io(e.to_string())),
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| LedgerError::Io(e.to_string()))?;
        *store.log.lock().expect("log lock") = Some(file);
        Ok(LedgerStore { path: Some(path.to_path_buf()), ..store })
    }

    pub fn method(&self) -> DidMethodId {
        self.method
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    fn method_name(&self) -> &'static str {
        self.method.name().expect("ledger method has a name")
    }

    fn insert_checked(&self, record: LedgerRecord) -> Result<(), LedgerError> {
        let mut index = self.index.write().expect("index lock");
        let history = index.get(&record.method_specific_id);
        record.check_continuity(history.and_then(|h| h.last()), self.method_name())?;
        index.entry(record.method_specific_id.clone()).or_default().push(record);
        Ok(())
    }

    /// Validates and durably appends `record`.
    pub fn append(&self, record: &LedgerRecord) -> Result<(), LedgerError> {
        let mut log = self.log.lock().expect("log lock");
        {
            let index = self.index.read().expect("index lock");
            let head = index.get(&record.method_specific_id).and_then(|h| h.last());
            record.check_continuity(head, self.method_name())?;
        }
        if let Some(file) = log.as_mut() {
            let body = canonical_json(record);
            let mut frame = Vec::with_capacity(4 + body.len());
            frame.extend_from_slice(&(body.len() as u32).to_be_bytes());
            frame.extend_from_slice(&body);
            file.write_all(&frame).map_err(|e| LedgerError::Io(e.to_string()))?;
            file.sync_data().map_err(|e| LedgerError::Io(e.to_string()))?;
        }
        // The log mutex serializes writers, so the head checked above is still current.
        self.index
            .write()
            .expect("index lock")
            .entry(record.method_specific_id.clone())
            .or_default()
            .push(record.clone());
        Ok(())
    }

    pub fn latest(&self, method_specific_id: &str) -> Option<LedgerRecord> {
        self.index
            .read()
            .expect("index lock")
            .get(method_specific_id)
            .and_then(|h| h.last().cloned())
    }

    pub fn history(&self, method_specific_id: &str) -> Vec<LedgerRecord> {
        self.index
            .read()
            .expect("index lock")
            .get(method_specific_id)
            .cloned()
            .unwrap_or_default()
    }

    pub fn id_count(&self) -> usize {
        self.index.read().expect("index lock").len()
    }

    pub fn record_count(&self) -> usize {
        self.index.read().expect("index lock").values().map(Vec::len).sum()
    }
}

impl LedgerClient for LedgerStore {
    fn get(&self, method_specific_id: &str) -> Result<Option<LedgerRecord>, LedgerError> {
        Ok(self.latest(method_specific_id))
    }

    fn put(&self, record: &LedgerRecord) -> Result<(), LedgerError> {
        self.append(record)
    }
}
