//! Deciding QDIMACS with an external solver process.
//!
//! The solver gets the instance path as its only argument and reports the
//! verdict through its exit status, 10 for true and 20 for false.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use thiserror::Error;

/// Environment variable naming the solver binary.
pub const SOLVER_ENV: &str = "SOMM_QBF_SOLVER";

#[derive(Debug, Error)]
pub enum ExternalError {
    #[error("no external solver configured (set {SOLVER_ENV})")]
    NotConfigured,
    #[error("external solver I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("external solver timed out after {0:?}")]
    Timeout(Duration),
    #[error("external solver exited with {code:?}, expected 10 or 20")]
    UnexpectedExit { code: Option<i32> },
}

pub fn solver_from_env() -> Option<PathBuf> {
    std::env::var_os(SOLVER_ENV)
        .filter(|s| !s.is_empty())
        .map(PathBuf::from)
}

pub fn solve_qdimacs(
    solver: &Path,
    text: &str,
    timeout: Option<Duration>,
) -> Result<bool, ExternalError> {
    let mut file = tempfile::Builder::new()
        .prefix("somm-")
        .suffix(".qdimacs")
        .tempfile()?;
    file.write_all(text.as_bytes())?;
    file.flush()?;
    let mut child = Command::new(solver)
        .arg(file.path())
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()?;
    let deadline = timeout.map(|t| Instant::now() + t);
    let status = loop {
        if let Some(status) = child.try_wait()? {
            break status;
        }
        if deadline.is_some_and(|d| Instant::now() >= d) {
            child.kill()?;
            child.wait()?;
            return Err(ExternalError::Timeout(timeout.unwrap_or_default()));
        }
        std::thread::sleep(Duration::from_millis(5));
    };
    match status.code() {
        Some(10) => Ok(true),
        Some(20) => Ok(false),
        code => Err(ExternalError::UnexpectedExit { code }),
    }
}

#[cfg(test)]
mod tests {
    use std::os::unix::fs::PermissionsExt;

    use super::*;

    fn script(dir: &Path, body: &str) -> PathBuf {
        let p = dir.join("solver.sh");
        std::fs::write(&p, format!("#!/bin/sh\n{body}\n")).unwrap();
        std::fs::set_permissions(&p, std::fs::Permissions::from_mode(0o755)).unwrap();
        p
    }

    #[test]
    fn exit_status_is_the_verdict() {
        let dir = tempfile::tempdir().unwrap();
        let yes = script(dir.path(), "test -s \"$1\" && exit 10");
        assert!(solve_qdimacs(&yes, "p cnf 0 0\n", None).unwrap());
        let no = script(dir.path(), "exit 20");
        assert!(!solve_qdimacs(&no, "p cnf 0 0\n", None).unwrap());
        let odd = script(dir.path(), "exit 3");
        assert!(matches!(
            solve_qdimacs(&odd, "", None),
            Err(ExternalError::UnexpectedExit { code: Some(3) })
        ));
    }

    #[test]
    fn slow_solver_is_killed() {
        let dir = tempfile::tempdir().unwrap();
        let slow = script(dir.path(), "sleep 5");
        let t0 = Instant::now();
        let r = solve_qdimacs(&slow, "", Some(Duration::from_millis(100)));
        assert!(matches!(r, Err(ExternalError::Timeout(_))));
        assert!(t0.elapsed() < Duration::from_secs(4));
    }

    #[test]
    fn missing_binary_is_an_io_error() {
        let r = solve_qdimacs(Path::new("/nonexistent/solver"), "", None);
        assert!(matches!(r, Err(ExternalError::Io(_))));
    }
}
