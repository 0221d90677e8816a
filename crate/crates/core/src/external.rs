//! Running external commands with stdin input and a timeout.

use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use wait_timeout::ChildExt;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CommandError {
    #[error("empty command line")]
    Empty,
    #[error("failed to start `{program}`: {message}")]
    Spawn { program: String, message: String },
    #[error("`{program}` timed out after {seconds:.1}s")]
    Timeout { program: String, seconds: f64 },
    #[error("`{program}` exited with status {code:?}: {stderr}")]
    Status {
        program: String,
        code: Option<i32>,
        stderr: String,
    },
    #[error("`{program}` wrote non-UTF-8 output")]
    Encoding { program: String },
    #[error("i/o with `{program}`: {message}")]
    Io { program: String, message: String },
}

/// A program and its arguments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalCommand {
    pub argv: Vec<String>,
    pub timeout_secs: f64,
}

impl ExternalCommand {
    pub fn new(argv: Vec<String>, timeout_secs: f64) -> Self {
        Self { argv, timeout_secs }
    }

    /// Split a shell-like command line on whitespace. No quoting rules.
    pub fn from_line(line: &str, timeout_secs: f64) -> Self {
        Self::new(line.split_whitespace().map(str::to_string).collect(), timeout_secs)
    }

    /// Feed `input` on stdin, return stdout. Non-zero exit and timeouts are errors.
    pub fn run(&self, input: &str) -> Result<String, CommandError> {
        let (program, args) = self.argv.split_first().ok_or(CommandError::Empty)?;
        let io_err = |e: std::io::Error| CommandError::Io {
            program: program.clone(),
            message: e.to_string(),
        };
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| CommandError::Spawn {
                program: program.clone(),
                message: e.to_string(),
            })?;

        // Writer and readers on their own threads so large payloads cannot
        // deadlock on full pipes.
        let mut stdin = child.stdin.take().expect("piped stdin");
        let payload = input.as_bytes().to_vec();
        let writer = std::thread::spawn(move || {
            let _ = stdin.write_all(&payload);
        });
        let mut stdout = child.stdout.take().expect("piped stdout");
        let reader = std::thread::spawn(move || {
            let mut buf = Vec::new();
            stdout.read_to_end(&mut buf).map(|_| buf)
        });
        let mut stderr = child.stderr.take().expect("piped stderr");
        let err_reader = std::thread::spawn(move || {
            let mut buf = Vec::new();
            let _ = stderr.read_to_end(&mut buf);
            buf
        });

        let timeout = Duration::from_secs_f64(self.timeout_secs.max(0.0));
        let status = match child.wait_timeout(timeout).map_err(io_err)? {
            Some(status) => status,
            None => {
                let _ = child.kill();
                let _ = child.wait();
                return Err(CommandError::Timeout {
                    program: program.clone(),
                    seconds: self.timeout_secs,
                });
            }
        };
        let _ = writer.join();
        let out = reader
            .join()
            .expect("reader thread")
            .map_err(io_err)?;
        let err = err_reader.join().expect("stderr thread");
        if !status.success() {
            return Err(CommandError::Status {
                program: program.clone(),
                code: status.code(),
                stderr: String::from_utf8_lossy(&err).trim().to_string(),
            });
        }
        String::from_utf8(out).map_err(|_| CommandError::Encoding {
            program: program.clone(),
        })
    }
}

#[cfg(all(test, unix))]
mod tests {
    use super::*;

    fn sh(script: &str, timeout: f64) -> ExternalCommand {
        ExternalCommand::new(vec!["sh".into(), "-c".into(), script.into()], timeout)
    }

    #[test]
    fn echoes_stdin() {
        assert_eq!(sh("cat", 10.0).run("hello").unwrap(), "hello");
    }

    #[test]
    fn nonzero_exit_is_an_error() {
        assert!(matches!(
            sh("echo bad >&2; exit 4", 10.0).run(""),
            Err(CommandError::Status { code: Some(4), .. })
        ));
    }

    #[test]
    fn timeout_kills_the_child() {
        assert!(matches!(
            sh("sleep 5", 0.2).run(""),
            Err(CommandError::Timeout { .. })
        ));
    }

    #[test]
    fn missing_program() {
        let cmd = ExternalCommand::new(vec!["/nonexistent/solver".into()], 1.0);
        assert!(matches!(cmd.run(""), Err(CommandError::Spawn { .. })));
        assert_eq!(ExternalCommand::new(vec![], 1.0).run(""), Err(CommandError::Empty));
    }
}
