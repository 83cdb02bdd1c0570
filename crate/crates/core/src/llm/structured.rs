use thiserror::Error;

use super::client::{GatewayError, GenerateRequest, LanguageModel, LlmExchange};
use super::decode::{decode_structured, DecodeError, DecodeNote, Decoded, SchemaSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct StructuredOutput {
    pub decoded: Decoded,
    /// Every attempt made, the re-prompt included.
    pub exchanges: Vec<LlmExchange>,
}

impl StructuredOutput {
    /// Decode notes from the accepted attempt, placeholder hits from a
    /// rejected first attempt, and transport notes from all attempts.
    pub fn notes(&self) -> Vec<DecodeNote> {
        let mut notes: Vec<DecodeNote> = self
            .exchanges
            .iter()
            .flat_map(|e| e.decode_notes.iter().cloned())
            .collect();
        notes.extend(self.decoded.notes.iter().cloned());
        notes
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StructuredError {
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error("{error} (after {attempts} attempts)")]
    Decode {
        error: DecodeError,
        attempts: usize,
        notes: Vec<DecodeNote>,
    },
}

impl StructuredError {
    pub fn is_unavailable(&self) -> bool {
        matches!(self, StructuredError::Gateway(e) if e.is_unavailable())
    }

    pub fn is_placeholder(&self) -> bool {
        matches!(
            self,
            StructuredError::Decode {
                error: DecodeError::Placeholder { .. },
                ..
            }
        )
    }
}

fn correction(err: &DecodeError) -> String {
    match err {
        DecodeError::Placeholder { literal } => format!(
            "Your previous answer contained the template text {literal:?}. \
             Replace every template value with the real value from the input, \
             for example a timestamp such as \"0:15:42\". Never copy example values."
        ),
        DecodeError::Malformed(_) => {
            "Your previous answer was not valid JSON. Reply with a single JSON object and nothing else.".into()
        }
        DecodeError::MissingField { field } => {
            format!("Your previous answer had no {field:?} field. Use exactly the field names requested.")
        }
        DecodeError::TypeMismatch { field, expected } => {
            format!("In your previous answer {field:?} was not {expected}. Follow the requested format exactly.")
        }
    }
}

/// Runs a JSON-mode request and decodes it against `schema`, re-prompting
/// once when the output cannot be decoded. Transport failures are returned
/// immediately without a second attempt.
pub fn generate_structured(
    model: &dyn LanguageModel,
    request: &GenerateRequest,
    schema: &SchemaSpec,
) -> Result<StructuredOutput, StructuredError> {
    let mut req = request.clone();
    req.json_mode = true;
    let mut exchanges = Vec::new();
    let mut notes = Vec::new();
    for attempt in 1..=2 {
        let exchange = model.generate(&req)?;
        let result = decode_structured(&exchange.response_text, schema);
        exchanges.push(exchange);
        match result {
            Ok(mut decoded) => {
                notes.append(&mut decoded.notes);
                decoded.notes = notes;
                return Ok(StructuredOutput { decoded, exchanges });
            }
            Err(err) => {
                if let DecodeError::Placeholder { literal } = &err {
                    notes.push(DecodeNote::PlaceholderHit {
                        literal: literal.clone(),
                    });
                }
                log::warn!("structured decode failed on attempt {attempt}: {err}");
                if attempt == 2 {
                    return Err(StructuredError::Decode {
                        error: err,
                        attempts: attempt,
                        notes,
                    });
                }
                req.prompt = format!("{}\n\n{}", request.prompt, correction(&err));
            }
        }
    }
    unreachable!("loop returns on the second attempt")
}
