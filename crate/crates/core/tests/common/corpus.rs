//! Paraphrase corpus: each description with the scenario fields it must yield.

use impact_screen::catalog::RequestType;
use impact_screen::parser::{DiagnosticKind, FieldSource};

pub struct Case {
    pub text: &'static str,
    pub model: &'static str,
    pub per_month: Option<u64>,
    pub volume_source: FieldSource,
    pub country: Option<&'static str>,
    pub request_type: RequestType,
}

const fn case(
    text: &'static str,
    model: &'static str,
    per_month: Option<u64>,
    volume_source: FieldSource,
    country: Option<&'static str>,
    request_type: RequestType,
) -> Case {
    Case {
        text,
        model,
        per_month,
        volume_source,
        country,
        request_type,
    }
}

use FieldSource::{Default as D, Explicit as E, Inferred as I};
use RequestType::*;

pub const CORPUS: &[Case] = &[
    case("We use GPT-4o-mini for customer support, around 4,000 uses per month.", "gpt-4o-mini", Some(4000), E, None, Chat),
    case("GPT-4o mini customer support bot handling 4000 requests a month", "gpt-4o-mini", Some(4000), E, None, Chat),
    case("Customer support with gpt4o-mini: about four thousand conversations every month", "gpt-4o-mini", Some(4000), E, None, Chat),
    case("4k support chats per month on GPT-4o mini", "gpt-4o-mini", Some(4000), E, None, Chat),
    case("GPT-4o mini helpdesk, 4,000/month", "gpt-4o-mini", Some(4000), E, None, Chat),
    case("Ministral 8B chatbot, 20,000 conversations a month in France", "ministral-8b", Some(20000), E, Some("FR"), Chat),
    case("French support chatbot on Ministral 8B with 20k messages monthly", "ministral-8b", Some(20000), E, Some("FR"), Chat),
    case("Retrieval assistant using GPT-5 mini, 4,000 uses per month, hosted in the US", "gpt-5-mini", Some(4000), E, Some("US"), Retrieval),
    case("RAG search over our knowledge base with GPT-5 mini: 4000 queries/month in the United States", "gpt-5-mini", Some(4000), E, Some("US"), Retrieval),
    case("GPT-5 mini semantic search, 1,000 searches per week", "gpt-5-mini", Some(4333), I, None, Retrieval),
    case("Summarize 200 documents per day with Llama 3.1 70B", "llama-3-1-70b", Some(6000), I, None, Summarization),
    case("Llama-3.1-70B summarization of 50 reports daily in America", "llama-3-1-70b", Some(1500), I, Some("US"), Summarization),
    case("Claude Opus 4.1 drafting marketing content, 12,000 requests per year", "claude-opus-4-1", Some(1000), I, None, Generation),
    case("Opus 4.1 for code generation at 300 calls a day", "claude-opus-4-1", Some(9000), I, None, Generation),
    case("Gemini 2.5 Pro answering questions", "gemini-2-5-pro", None, D, None, Generic),
    case("gemini-2.5-pro, 2.5 million requests a month", "gemini-2-5-pro", Some(2_500_000), E, None, Generic),
    case("GPT-5.2 for customer service in the USA, 1,234,567 calls per month", "gpt-5-2", Some(1_234_567), E, Some("US"), Chat),
    case("Ministral 3B on device, 20 thousand prompts per month in FR", "ministral-3b", Some(20000), E, Some("FR"), Generic),
    case("Help us size GPT-5 mini for a chatbot", "gpt-5-mini", None, D, None, Chat),
    case("Ministral 8B content writing, a thousand requests each week, in France", "ministral-8b", Some(4333), I, Some("FR"), Generation),
    case("We run Llama 3.1 70B for internal Q&A: 500 questions every day", "llama-3-1-70b", Some(15000), I, None, Retrieval),
    case("GPT-4o mini, twenty-five thousand uses per month, support", "gpt-4o-mini", Some(25000), E, None, Chat),
    case("Digest emails with Claude Opus, 1.5k per month", "claude-opus-4-1", Some(1500), E, None, Summarization),
    case("ministral 8b - 240,000 requests per year", "ministral-8b", Some(20000), I, None, Generic),
];

/// Descriptions that must fail, each with one diagnostic kind it must report.
pub const FAILURES: &[(&str, DiagnosticKind)] = {
    use DiagnosticKind as K;
    &[
        ("", K::NoModel),
        ("use FooNet 9", K::NoModel),
        ("a chatbot with 4,000 uses per month", K::NoModel),
        ("GPT for support", K::AmbiguousModel),
        ("Ministral for support", K::AmbiguousModel),
        ("GPT-5 mini vs Llama 3.1 70B", K::ConflictingModels),
        ("GPT-5 mini, 4,000 per month or 200 per day", K::ConflictingVolumes),
        ("GPT-5 mini, 0 requests per month", K::NonPositiveVolume),
        ("GPT-5 mini, 5 requests per year", K::NonPositiveVolume),
        ("GPT-5 mini, 4.000 requests per month", K::AmbiguousNumeral),
        ("GPT-5 mini, 4,00 requests per month", K::AmbiguousNumeral),
        ("GPT-5 mini, 0 input tokens and 0 output tokens", K::InvalidTokens),
        ("GPT-5 mini, 100 input tokens, 200 input tokens", K::ConflictingTokens),
        ("GPT-5 mini in France and the US", K::ConflictingCountries),
    ]
};
