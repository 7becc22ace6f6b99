//! Isolated execution of guest programs against a symbol store.
//!
//! Each run owns one worker process: the harness pipes `{source, symbols,
//! limits}` as JSON to the worker's stdin, the worker deserializes symbols
//! into a variable named `symbols`, invokes the `solve` entry function, and
//! replies with a single JSON object `{status, return, stdout, exc,
//! duration}`. Wall-clock limits are enforced host-side by killing the
//! worker; memory limits worker-side via rlimits. Network modules are denied
//! inside the worker and file access is confined to a per-run scratch
//! directory that is deleted afterwards.

use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Condvar, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::program::ProgramArtifact;
use crate::symbols::SymbolStore;

/// Worker harness source, embedded so deployments are single-binary.
const WORKER_SOURCE: &str = include_str!("../assets/worker.py");

/// Modules the worker refuses to import: network access and host-mutating
/// system facilities.
pub const DEFAULT_DENIED_MODULES: &[&str] = &[
    "socket",
    "ssl",
    "http",
    "urllib",
    "requests",
    "ftplib",
    "smtplib",
    "telnetlib",
    "imaplib",
    "poplib",
    "xmlrpc",
    "subprocess",
    "ctypes",
    "multiprocessing",
    "os",
    "shutil",
    "pathlib",
    "webbrowser",
];

/// Resource limits for one execution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExecLimits {
    pub wall_seconds: f64,
    pub memory_bytes: u64,
    /// Always false; kept visible so configs show the contract.
    pub network_allowed: bool,
}

impl Default for ExecLimits {
    fn default() -> Self {
        Self {
            wall_seconds: 10.0,
            memory_bytes: 512 * 1024 * 1024,
            network_allowed: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    Exception,
    Timeout,
    ResourceExhausted,
    HarnessError,
}

/// Everything observable from one guest run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub return_value: Option<serde_json::Value>,
    pub stdout: String,
    pub exception_text: String,
    pub duration_seconds: f64,
}

impl RunOutcome {
    pub fn harness_error(message: impl Into<String>) -> Self {
        Self {
            status: RunStatus::HarnessError,
            return_value: None,
            stdout: String::new(),
            exception_text: message.into(),
            duration_seconds: 0.0,
        }
    }

    /// True when the returned value is a scalar (text, number, or boolean).
    pub fn returns_scalar(&self) -> bool {
        matches!(
            self.return_value,
            Some(serde_json::Value::String(_))
                | Some(serde_json::Value::Number(_))
                | Some(serde_json::Value::Bool(_))
        )
    }
}

#[derive(Deserialize)]
struct WorkerReply {
    status: String,
    #[serde(rename = "return")]
    return_value: Option<serde_json::Value>,
    stdout: String,
    exc: String,
    duration: f64,
}

/// Guest interpreter adapter plus concurrency bookkeeping. Cloning shares
/// the concurrency cap.
#[derive(Clone)]
pub struct Sandbox {
    interpreter: String,
    denied_modules: Vec<String>,
    gate: Arc<Gate>,
}

impl Default for Sandbox {
    fn default() -> Self {
        Self::new("python3", 8)
    }
}

impl Sandbox {
    pub fn new(interpreter: impl Into<String>, max_concurrent: usize) -> Self {
        Self {
            interpreter: interpreter.into(),
            denied_modules: DEFAULT_DENIED_MODULES
                .iter()
                .map(|s| s.to_string())
                .collect(),
            gate: Arc::new(Gate::new(max_concurrent.max(1))),
        }
    }

    pub fn interpreter(&self) -> &str {
        &self.interpreter
    }

    /// Whether the configured interpreter can be spawned at all.
    pub fn is_available(&self) -> bool {
        Command::new(&self.interpreter)
            .arg("--version")
            .stdout(Stdio::null())
            .stderr(Stdio::null())
            .status()
            .map(|s| s.success())
            .unwrap_or(false)
    }

    /// Run `solve(symbols)` from `program` under the given limits.
    ///
    /// All failures are reported in-band through [`RunOutcome::status`];
    /// this only allocates and never panics on guest misbehavior.
    pub fn execute(
        &self,
        program: &ProgramArtifact,
        symbols: &SymbolStore,
        limits: &ExecLimits,
    ) -> RunOutcome {
        let _permit = self.gate.acquire();
        let scratch = match ScratchDir::create() {
            Ok(dir) => dir,
            Err(e) => return RunOutcome::harness_error(format!("scratch dir: {e}")),
        };

        let request = serde_json::json!({
            "source": program.source,
            "symbols": symbols.root(),
            "memory_bytes": limits.memory_bytes,
            "entry": program.entry_name,
            "denied_modules": self.denied_modules,
        });
        let request_bytes = request.to_string();

        let child = Command::new(&self.interpreter)
            .args(["-I", "-E", "-S", "-u", "-c", WORKER_SOURCE])
            .current_dir(&scratch.path)
            .env_clear()
            .env("PATH", std::env::var("PATH").unwrap_or_default())
            .env("PYTHONHASHSEED", "0")
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn();
        let mut child = match child {
            Ok(c) => c,
            Err(e) => {
                return RunOutcome::harness_error(format!(
                    "failed to spawn interpreter '{}': {e}",
                    self.interpreter
                ))
            }
        };

        let start = Instant::now();
        let mut stdin = child.stdin.take().expect("stdin piped");
        let write_res = std::thread::spawn(move || {
            let res = stdin.write_all(request_bytes.as_bytes());
            drop(stdin);
            res
        });

        let mut stdout_pipe = child.stdout.take().expect("stdout piped");
        let stdout_reader = std::thread::spawn(move || {
            use std::io::Read;
            let mut buf = Vec::new();
            let _ = stdout_pipe.read_to_end(&mut buf);
            buf
        });
        let mut stderr_pipe = child.stderr.take().expect("stderr piped");
        let stderr_reader = std::thread::spawn(move || {
            use std::io::Read;
            let mut buf = Vec::new();
            let _ = stderr_pipe.read_to_end(&mut buf);
            buf
        });

        let deadline = Duration::from_secs_f64(limits.wall_seconds.max(0.01));
        let mut timed_out = false;
        loop {
            match child.try_wait() {
                Ok(Some(_)) => break,
                Ok(None) => {
                    if start.elapsed() >= deadline {
                        timed_out = true;
                        let _ = child.kill();
                        let _ = child.wait();
                        break;
                    }
                    std::thread::sleep(Duration::from_millis(5));
                }
                Err(e) => {
                    let _ = child.kill();
                    let _ = child.wait();
                    let _ = write_res.join();
                    let _ = stdout_reader.join();
                    let _ = stderr_reader.join();
                    return RunOutcome::harness_error(format!("wait failed: {e}"));
                }
            }
        }
        let elapsed = start.elapsed().as_secs_f64();
        let _ = write_res.join();
        let stdout_bytes = stdout_reader.join().unwrap_or_default();
        let stderr_bytes = stderr_reader.join().unwrap_or_default();

        if timed_out {
            return RunOutcome {
                status: RunStatus::Timeout,
                return_value: None,
                stdout: String::new(),
                exception_text: format!(
                    "execution exceeded the wall limit of {} s",
                    limits.wall_seconds
                ),
                duration_seconds: elapsed,
            };
        }

        let reply_text = String::from_utf8_lossy(&stdout_bytes);
        match serde_json::from_str::<WorkerReply>(reply_text.trim()) {
            Ok(reply) => RunOutcome {
                status: match reply.status.as_str() {
                    "ok" => RunStatus::Ok,
                    "exception" => RunStatus::Exception,
                    "resource_exhausted" => RunStatus::ResourceExhausted,
                    _ => RunStatus::HarnessError,
                },
                return_value: if reply.status == "ok" {
                    Some(reply.return_value.unwrap_or(serde_json::Value::Null))
                } else {
                    None
                },
                stdout: reply.stdout,
                exception_text: reply.exc,
                duration_seconds: reply.duration,
            },
            Err(_) => {
                let stderr_text = String::from_utf8_lossy(&stderr_bytes);
                // An rlimit hit can kill the interpreter before it can reply.
                let status = if stderr_text.contains("MemoryError") {
                    RunStatus::ResourceExhausted
                } else {
                    RunStatus::HarnessError
                };
                RunOutcome {
                    status,
                    return_value: None,
                    stdout: String::new(),
                    exception_text: format!(
                        "worker produced no parseable result; stderr: {}",
                        stderr_text.chars().take(2000).collect::<String>()
                    ),
                    duration_seconds: elapsed,
                }
            }
        }
    }
}

/// Per-run scratch directory, removed on drop.
struct ScratchDir {
    path: PathBuf,
}

impl ScratchDir {
    fn create() -> std::io::Result<Self> {
        static COUNTER: AtomicU64 = AtomicU64::new(0);
        let n = COUNTER.fetch_add(1, Ordering::Relaxed);
        let path = std::env::temp_dir().join(format!(
            "symsolve-run-{}-{}-{}",
            std::process::id(),
            n,
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.subsec_nanos())
                .unwrap_or(0)
        ));
        std::fs::create_dir_all(&path)?;
        Ok(Self { path })
    }
}

impl Drop for ScratchDir {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.path);
    }
}

/// Counting semaphore bounding concurrent executions.
struct Gate {
    slots: Mutex<usize>,
    cond: Condvar,
}

struct Permit<'a>(&'a Gate);

impl Gate {
    fn new(slots: usize) -> Self {
        Self {
            slots: Mutex::new(slots),
            cond: Condvar::new(),
        }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut slots = self.slots.lock().expect("gate lock");
        while *slots == 0 {
            slots = self.cond.wait(slots).expect("gate wait");
        }
        *slots -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut slots = self.0.slots.lock().expect("gate lock");
        *slots += 1;
        self.0.cond.notify_one();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sandbox() -> Option<Sandbox> {
        let sb = Sandbox::default();
        if sb.is_available() {
            Some(sb)
        } else {
            eprintln!("interpreter not available, skipping sandbox test");
            None
        }
    }

    fn run(source: &str, symbols: serde_json::Value, limits: &ExecLimits) -> Option<RunOutcome> {
        let sb = sandbox()?;
        let program = ProgramArtifact::new(source, 0);
        let store = SymbolStore::new(symbols);
        Some(sb.execute(&program, &store, limits))
    }

    #[test]
    fn returns_scalar_from_symbols() {
        let Some(out) = run(
            "def solve(symbols):\n    return symbols['x'] + 1\n",
            serde_json::json!({"x": 41}),
            &ExecLimits::default(),
        ) else {
            return;
        };
        assert_eq!(out.status, RunStatus::Ok);
        assert_eq!(out.return_value, Some(serde_json::json!(42)));
    }

    #[test]
    fn captures_stdout() {
        let Some(out) = run(
            "def solve(symbols):\n    print('hello')\n    return 0\n",
            serde_json::json!(null),
            &ExecLimits::default(),
        ) else {
            return;
        };
        assert_eq!(out.stdout, "hello\n");
    }

    #[test]
    fn exception_reported_with_traceback() {
        let Some(out) = run(
            "def solve(symbols):\n    return 1 / 0\n",
            serde_json::json!(null),
            &ExecLimits::default(),
        ) else {
            return;
        };
        assert_eq!(out.status, RunStatus::Exception);
        assert!(out.exception_text.contains("ZeroDivisionError"));
        assert!(out.exception_text.contains("solution.py"));
        assert!(out.return_value.is_none());
    }

    #[test]
    fn infinite_loop_times_out_within_grace() {
        let limits = ExecLimits {
            wall_seconds: 2.0,
            ..Default::default()
        };
        let started = Instant::now();
        let Some(out) = run(
            "def solve(symbols):\n    while True:\n        pass\n",
            serde_json::json!(null),
            &limits,
        ) else {
            return;
        };
        assert_eq!(out.status, RunStatus::Timeout);
        assert!(
            started.elapsed().as_secs_f64() < 3.0,
            "timeout took too long"
        );
    }

    #[test]
    fn missing_entry_is_harness_error() {
        let Some(out) = run("x = 1\n", serde_json::json!(null), &ExecLimits::default()) else {
            return;
        };
        assert_eq!(out.status, RunStatus::HarnessError);
        assert!(out.exception_text.contains("solve"));
    }

    #[test]
    fn syntax_error_is_harness_error() {
        let Some(out) = run(
            "def solve(symbols): return (1\n",
            serde_json::json!(null),
            &ExecLimits::default(),
        ) else {
            return;
        };
        assert_eq!(out.status, RunStatus::HarnessError);
    }

    #[test]
    fn non_serializable_return_is_harness_error() {
        let Some(out) = run(
            "def solve(symbols):\n    return {1, 2, 3}\n",
            serde_json::json!(null),
            &ExecLimits::default(),
        ) else {
            return;
        };
        assert_eq!(out.status, RunStatus::HarnessError);
        assert!(out.exception_text.contains("not JSON-serializable"));
    }

    #[test]
    fn zero_arg_entry_supported() {
        let Some(out) = run(
            "def solve():\n    return 7\n",
            serde_json::json!(null),
            &ExecLimits::default(),
        ) else {
            return;
        };
        assert_eq!(out.status, RunStatus::Ok);
        assert_eq!(out.return_value, Some(serde_json::json!(7)));
    }

    #[test]
    fn socket_open_denied() {
        let Some(out) = run(
            "def solve(symbols):\n    import socket\n    s = socket.socket()\n    return 1\n",
            serde_json::json!(null),
            &ExecLimits::default(),
        ) else {
            return;
        };
        assert_eq!(out.status, RunStatus::Exception);
        assert!(out.exception_text.contains("not available in the sandbox"));
    }

    #[test]
    fn file_access_outside_scratch_denied() {
        let Some(out) = run(
            "def solve(symbols):\n    open('/etc/passwd').read()\n    return 1\n",
            serde_json::json!(null),
            &ExecLimits::default(),
        ) else {
            return;
        };
        assert_eq!(out.status, RunStatus::Exception);
        assert!(out.exception_text.contains("PermissionError"));
    }

    #[test]
    fn file_access_inside_scratch_allowed() {
        let Some(out) = run(
            "def solve(symbols):\n    with open('t.txt', 'w') as fh:\n        fh.write('ok')\n    return open('t.txt').read()\n",
            serde_json::json!(null),
            &ExecLimits::default(),
        ) else {
            return;
        };
        assert_eq!(out.status, RunStatus::Ok);
        assert_eq!(out.return_value, Some(serde_json::json!("ok")));
    }

    #[test]
    fn memory_hog_is_resource_exhausted() {
        let limits = ExecLimits {
            memory_bytes: 128 * 1024 * 1024,
            ..Default::default()
        };
        let Some(out) = run(
            "def solve(symbols):\n    xs = []\n    while True:\n        xs.append('x' * (1 << 20))\n",
            serde_json::json!(null),
            &limits,
        ) else {
            return;
        };
        assert_eq!(out.status, RunStatus::ResourceExhausted);
    }

    #[test]
    fn deterministic_across_runs() {
        let src = "def solve(symbols):\n    d = {'b': 2, 'a': 1}\n    print(sorted(d))\n    return sum(d.values())\n";
        let Some(first) = run(src, serde_json::json!(null), &ExecLimits::default()) else {
            return;
        };
        let second = run(src, serde_json::json!(null), &ExecLimits::default()).expect("second run");
        assert_eq!(first.status, second.status);
        assert_eq!(first.return_value, second.return_value);
        assert_eq!(first.stdout, second.stdout);
    }
}

#[cfg(test)]
mod timing_tests {
    use super::*;

    // Wall-time bound: kill + cleanup stays within a second of the limit,
    // measured over repeated runs.
    #[test]
    fn timeout_bound_holds_over_repetitions() {
        let sb = Sandbox::default();
        if !sb.is_available() {
            return;
        }
        let program =
            ProgramArtifact::new("def solve(symbols):\n    while True:\n        pass\n", 0);
        let symbols = SymbolStore::default();
        let limits = ExecLimits {
            wall_seconds: 0.3,
            ..Default::default()
        };
        for _ in 0..10 {
            let started = Instant::now();
            let out = sb.execute(&program, &symbols, &limits);
            assert_eq!(out.status, RunStatus::Timeout);
            assert!(
                started.elapsed().as_secs_f64() <= limits.wall_seconds + 1.0,
                "kill exceeded the grace window"
            );
        }
    }
}
