//! Human-evaluation protocol: judgment records, items, prompt sheets and
//! report assembly.

pub mod prompts;
pub mod records;
pub mod report;

pub use prompts::{generate_prompt_sheet, Prompt, PromptSheet};
pub use records::{
    read_items_jsonl, read_records_csv, record_violations, validate_items, validate_record, write_items_jsonl,
    write_records_csv, EvaluationItem, EvaluationRecord, ReasonCode, Subset, System,
};
pub use report::{build_report, BleuInputs, TestSetBleu};
