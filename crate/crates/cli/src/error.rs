use std::fmt;

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_MISSING_STAGE: i32 = 2;
pub const EXIT_CONFIG: i32 = 64;
pub const EXIT_INVARIANT: i32 = 70;

/// An error carrying the process exit code.
#[derive(Debug)]
pub struct Fail {
    pub code: i32,
    pub message: String,
}

impl fmt::Display for Fail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Fail {}

pub fn missing_stage(stage: &str, needed_by: &str) -> anyhow::Error {
    Fail {
        code: EXIT_MISSING_STAGE,
        message: format!("stage `{stage}` has not completed; run it before `{needed_by}`"),
    }
    .into()
}

pub fn invalid_config(message: impl Into<String>) -> anyhow::Error {
    Fail { code: EXIT_CONFIG, message: message.into() }.into()
}

pub fn invariant(message: impl Into<String>) -> anyhow::Error {
    Fail { code: EXIT_INVARIANT, message: message.into() }.into()
}

/// Exit code for an error chain.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(f) = cause.downcast_ref::<Fail>() {
            return f.code;
        }
        if let Some(vistheme_core::refine::RefineError::Invariant(_)) = cause.downcast_ref() {
            return EXIT_INVARIANT;
        }
        if let Some(vistheme_core::refine::RefineError::InvalidConfig(_)) = cause.downcast_ref() {
            return EXIT_CONFIG;
        }
    }
    EXIT_FAILURE
}
