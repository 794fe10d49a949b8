use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{request_digest, ChatBackend, CompletionParams, Conversation, LlmError, Message};

/// One line of the cache file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayRecord {
    pub digest: String,
    pub response_content: String,
    pub timestamp: String,
}

#[derive(Default)]
struct Store {
    responses: HashMap<String, Vec<String>>,
    served: HashMap<String, usize>,
}

/// Record/replay cache over JSON lines.
///
/// The n-th request with a given digest is answered by the n-th record with
/// that digest, so repeated identical requests replay distinct responses in
/// their recorded order. Misses go to the fallback and are appended to the
/// file; without a fallback a miss is an error.
pub struct ReplayBackend {
    path: PathBuf,
    store: Mutex<Store>,
    fallback: Option<Box<dyn ChatBackend>>,
    writer: Mutex<Option<File>>,
}

impl ReplayBackend {
    pub fn open(path: impl AsRef<Path>, fallback: Option<Box<dyn ChatBackend>>) -> Result<Self, LlmError> {
        let path = path.as_ref().to_path_buf();
        let io = |message: String| LlmError::Io { path: path.display().to_string(), message };
        let mut store = Store::default();
        if path.exists() {
            let file = File::open(&path).map_err(|e| io(e.to_string()))?;
            for (n, line) in BufReader::new(file).lines().enumerate() {
                let line = line.map_err(|e| io(e.to_string()))?;
                if line.trim().is_empty() {
                    continue;
                }
                let record: ReplayRecord =
                    serde_json::from_str(&line).map_err(|e| io(format!("line {}: {e}", n + 1)))?;
                store.responses.entry(record.digest).or_default().push(record.response_content);
            }
        } else if fallback.is_none() {
            return Err(io("replay cache does not exist and no fallback is configured".into()));
        }
        Ok(Self { path, store: Mutex::new(store), fallback, writer: Mutex::new(None) })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn record_count(&self) -> usize {
        self.store.lock().expect("replay lock").responses.values().map(Vec::len).sum()
    }

    fn append(&self, record: &ReplayRecord) -> Result<(), LlmError> {
        let io = |message: String| LlmError::Io { path: self.path.display().to_string(), message };
        let mut writer = self.writer.lock().expect("replay writer lock");
        if writer.is_none() {
            let file = OpenOptions::new()
                .create(true)
                .append(true)
                .open(&self.path)
                .map_err(|e| io(e.to_string()))?;
            *writer = Some(file);
        }
        let file = writer.as_mut().expect("opened above");
        let mut line = serde_json::to_string(record).expect("serializable");
        line.push('\n');
        file.write_all(line.as_bytes()).and_then(|_| file.flush()).map_err(|e| io(e.to_string()))
    }
}

impl ChatBackend for ReplayBackend {
    fn complete(&self, conversation: &Conversation, params: &CompletionParams) -> Result<Message, LlmError> {
        let digest = request_digest(conversation, params);
        {
            let mut store = self.store.lock().expect("replay lock");
            let served = store.served.get(&digest).copied().unwrap_or(0);
            let hit = store.responses.get(&digest).and_then(|r| r.get(served)).cloned();
            if let Some(content) = hit {
                store.served.insert(digest, served + 1);
                return Ok(Message::assistant(content));
            }
        }
        let fallback = self.fallback.as_ref().ok_or_else(|| LlmError::CacheMiss { digest: digest.clone() })?;
        let message = fallback.complete(conversation, params)?;
        let record = ReplayRecord {
            digest: digest.clone(),
            response_content: message.content.clone(),
            timestamp: chrono::Utc::now().to_rfc3339(),
        };
        self.append(&record)?;
        let mut store = self.store.lock().expect("replay lock");
        store.responses.entry(digest.clone()).or_default().push(message.content.clone());
        *store.served.entry(digest).or_default() += 1;
        Ok(message)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llmlink::ScriptedMock;
    use std::sync::Arc;

    #[test]
    fn record_then_replay_without_traffic() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.jsonl");
        let mut conv = Conversation::new("s");
        conv.push_user("generate");
        let params = CompletionParams::generation();

        let live = Arc::new(ScriptedMock::new(["first", "second"]));
        let recorder = ReplayBackend::open(&path, Some(Box::new(live.clone()))).unwrap();
        assert_eq!(recorder.complete(&conv, &params).unwrap().content, "first");
        assert_eq!(recorder.complete(&conv, &params).unwrap().content, "second");
        assert_eq!(live.calls().len(), 2);

        let replay = ReplayBackend::open(&path, None).unwrap();
        assert_eq!(replay.record_count(), 2);
        assert_eq!(replay.complete(&conv, &params).unwrap().content, "first");
        assert_eq!(replay.complete(&conv, &params).unwrap().content, "second");
        assert!(matches!(replay.complete(&conv, &params), Err(LlmError::CacheMiss { .. })));

        let line = std::fs::read_to_string(&path).unwrap();
        let rec: ReplayRecord = serde_json::from_str(line.lines().next().unwrap()).unwrap();
        assert_eq!(rec.digest, request_digest(&conv, &params));
    }

    #[test]
    fn missing_cache_without_fallback_fails() {
        let dir = tempfile::tempdir().unwrap();
        assert!(ReplayBackend::open(dir.path().join("none.jsonl"), None).is_err());
    }

    #[test]
    fn corrupt_line_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        std::fs::write(&path, "{not json}\n").unwrap();
        let err = ReplayBackend::open(&path, None).err().unwrap();
        assert!(err.to_string().contains("line 1"));
    }
}
