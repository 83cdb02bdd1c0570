//! The only code that talks to the local inference server.
//!
//! Small local models fail in quiet ways: a too-small context window
//! truncates input without complaint, schema examples get echoed back as
//! data, and field names drift between runs. This module sends the context
//! size on every request, flags suspiciously fast answers on long prompts,
//! and decodes JSON defensively against a declared [`SchemaSpec`].

mod client;
mod config;
mod decode;
mod structured;
mod timestamp;

pub use client::{fast_response_suspect, GatewayError, GenerateRequest, HttpGateway, LanguageModel, LlmExchange};
pub use config::{
    ConfigError, GatewayConfig, ANALYSIS_TEMPERATURE, DEFAULT_CONTEXT_TOKENS, ENV_LLM_MODEL, ENV_LLM_URL,
    MIN_ANALYSIS_CONTEXT_TOKENS, SYNTHESIS_TEMPERATURE,
};
pub use decode::{
    decode_structured, DecodeError, DecodeNote, Decoded, Element, FieldKind, FieldSpec, SchemaSpec,
    DEFAULT_PLACEHOLDERS,
};
pub use structured::{generate_structured, StructuredError, StructuredOutput};
pub use timestamp::{format_timestamp, parse_timestamp, validate_timestamp, TimestampRejection, FABRICATION_SLACK_S};
