use std::collections::{BTreeSet, HashMap};

use proptest::prelude::*;
use sift_core::context::{extract_local_context, locate_enclosing_method, MethodSpan};
use sift_core::evaluation::{compute_metrics, rank_warnings, Evaluation};
use sift_core::features::{feature_nullcheck_method, feature_returns_null, NullCheckConfig};
use sift_core::ingest::{parse_qualifier, warning_id, WarningKind};
use sift_core::lexer::mask_non_code;
use sift_core::par::Execution;
use sift_core::verifier::{
    apply_consistency_groups, verify_all, BackendError, CompletionBackend, CompletionRequest, CompletionResult,
    VerifierConfig,
};
use sift_core::{ContextBundle, Label, LabeledWarning, Prediction, Provenance, Verdict, Warning};

fn warning(repo: &str, file: &str, line: u32, target: &str) -> Warning {
    Warning::new(
        WarningKind::NullDereference,
        file,
        line,
        None,
        "m",
        format!("object `{target}` last assigned on line {} could be null and is dereferenced at line {line}.", line.saturating_sub(1).max(1)),
        repo,
    )
}

fn empty_bundle(id: &str) -> ContextBundle {
    ContextBundle {
        warning_id: id.to_string(),
        local_context: String::new(),
        nonlocal_contexts: vec![],
        is_chained_call: false,
        target_in_local: false,
    }
}

fn verdict(id: &str, legit: bool) -> Verdict {
    Verdict {
        warning_id: id.to_string(),
        predicted: if legit { Prediction::Legitimate } else { Prediction::FalsePositive },
        score: if legit { 0.2 } else { 0.0 },
        provenance: if legit { Provenance::SignalHit { prompt: 0, beam: 0 } } else { Provenance::NoSignal },
    }
}

/// Corpus of distinct warnings with labels and verdict bits.
fn corpus() -> impl Strategy<Value = Vec<(Warning, bool, bool)>> {
    prop::collection::vec((0usize..3, 0usize..4, any::<bool>(), any::<bool>()), 1..40).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, (repo, var, tp, keep))| {
                (warning(&format!("r{repo}"), &format!("F{i}.java"), 10, &format!("v{var}")), tp, keep)
            })
            .collect()
    })
}

struct Silent;

impl CompletionBackend for Silent {
    fn tag(&self) -> &str {
        "silent"
    }
    fn complete(&self, _: &CompletionRequest) -> Result<CompletionResult, BackendError> {
        Ok(CompletionResult { texts: vec![], backend: "silent".into() })
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn ids_are_stable_hex(file in "[a-zA-Z/._]{1,30}", line in 1u32..100_000, q in ".{0,80}") {
        let a = warning_id(&file, line, "NULL_DEREFERENCE", &q);
        prop_assert_eq!(a.len(), 16);
        prop_assert!(a.bytes().all(|b| b.is_ascii_hexdigit() && !b.is_ascii_uppercase()));
        prop_assert_eq!(&a, &warning_id(&file, line, "NULL_DEREFERENCE", &q));
    }

    #[test]
    fn qualifier_parsing_is_total(q in ".{0,200}", line in 1u32..10_000) {
        let f = parse_qualifier(&WarningKind::NullDereference, &q, line);
        if let Some(a) = f.assigned_line {
            prop_assert!(a <= f.deref_line);
        }
        prop_assert_eq!(f.has_variable_reference, f.target_variable.is_some());
    }

    #[test]
    fn masking_preserves_layout(text in "[a-z/*\"'\\\\{}() \n;=]{0,200}") {
        let masked = mask_non_code(&text);
        prop_assert_eq!(masked.len(), text.len());
        let nl = |s: &str| s.match_indices('\n').map(|(i, _)| i).collect::<Vec<_>>();
        prop_assert_eq!(nl(&masked), nl(&text));
    }

    #[test]
    fn local_context_excludes_warning_line(body_lines in 1usize..30, pick in 0usize..30) {
        let mut src = String::from("class A {\n  void m() {\n");
        for i in 0..body_lines {
            src.push_str(&format!("    int x{i} = {i};\n"));
        }
        src.push_str("  }\n}\n");
        let line = 2 + (pick % (body_lines + 1)) as u32;
        let span = locate_enclosing_method("A.java", &src, line).unwrap();
        prop_assert_eq!(span.start_line, 2);
        let local = extract_local_context(&span, line).unwrap();
        let n = if local.is_empty() { 0 } else { local.trim_end_matches('\n').split('\n').count() };
        prop_assert_eq!(n as u32, line - span.start_line);
    }

    #[test]
    fn features_are_monotone(local in "[a-z =;.()\n]{0,80}", body in "[a-z =;.()\n]{0,80}") {
        let cfg = NullCheckConfig::default();
        let span = |b: String| MethodSpan { file: "B.java".into(), name: "f".into(), start_line: 1, end_line: 1, body: b, degraded: false };
        let before = ContextBundle {
            nonlocal_contexts: vec![span(body.clone())],
            local_context: local.clone(),
            ..empty_bundle("0000000000000000")
        };
        let after = ContextBundle {
            nonlocal_contexts: vec![span(format!("{body}\nreturn null;\n"))],
            local_context: format!("{local}\nObjects.requireNonNull(x);\n"),
            ..before.clone()
        };
        prop_assert!(feature_returns_null(&before) <= feature_returns_null(&after));
        prop_assert_eq!(feature_returns_null(&after), 1);
        prop_assert_eq!(feature_nullcheck_method(&after, &cfg), 1);
    }

    #[test]
    fn metric_identities(rows in corpus()) {
        let labeled: Vec<_> = rows.iter().map(|(w, tp, _)| LabeledWarning {
            warning: w.clone(),
            label: if *tp { Label::TruePositive } else { Label::FalsePositive },
        }).collect();
        let verdicts: Vec<_> = rows.iter().map(|(w, _, keep)| verdict(&w.id, *keep)).collect();
        let Evaluation::Resolved(r) = compute_metrics(&labeled, &verdicts, &[]).unwrap() else {
            panic!("unexpected unresolved");
        };
        let m = &r.metrics;
        prop_assert_eq!(m.kept_tp + m.kept_fp, m.kept);
        prop_assert!(m.kept_tp <= m.analyzer_tp);
        prop_assert_eq!(r.per_repo.values().map(|p| p.total).sum::<usize>(), m.total);

        let keep_all: Vec<_> = rows.iter().map(|(w, _, _)| verdict(&w.id, true)).collect();
        let all = compute_metrics(&labeled, &keep_all, &[]).unwrap();
        let a = &all.resolved().unwrap().metrics;
        prop_assert_eq!(a.precision, a.baseline_precision);
        if a.analyzer_tp > 0 {
            prop_assert_eq!(a.recall, 1.0);
        }
    }

    #[test]
    fn ranking_is_sorted_permutation(rows in corpus(), scores in prop::collection::vec(0u8..5, 40)) {
        let ws: Vec<Warning> = rows.into_iter().map(|(w, _, _)| w).collect();
        let map: HashMap<_, _> = ws.iter().zip(&scores).map(|(w, s)| (w.id.clone(), *s as f64 / 4.0)).collect();
        let ranked = rank_warnings(&ws, &map).unwrap();
        let a: BTreeSet<_> = ranked.iter().map(|r| r.warning.id.clone()).collect();
        let b: BTreeSet<_> = ws.iter().map(|w| w.id.clone()).collect();
        prop_assert_eq!(ranked.len(), ws.len());
        prop_assert_eq!(a, b);
        for pair in ranked.windows(2) {
            prop_assert!(pair[0].score > pair[1].score
                || (pair[0].score == pair[1].score && pair[0].warning.id < pair[1].warning.id));
        }
    }

    #[test]
    fn grouping_is_or_monotone(rows in corpus()) {
        let ws: Vec<Warning> = rows.iter().map(|(w, _, _)| w.clone()).collect();
        let vs: Vec<_> = rows.iter().map(|(w, _, keep)| verdict(&w.id, *keep)).collect();
        let out = apply_consistency_groups(&vs, &ws);
        prop_assert_eq!(out.len(), vs.len());
        for (before, after) in vs.iter().zip(&out) {
            prop_assert_eq!(&before.warning_id, &after.warning_id);
            if before.predicted == Prediction::Legitimate {
                prop_assert_eq!(before, after);
            }
        }
        // every group is uniform afterwards
        let mut by_group: HashMap<(String, String), BTreeSet<bool>> = HashMap::new();
        for (w, v) in ws.iter().zip(&out) {
            by_group.entry((w.repo.clone(), w.target().unwrap().to_string()))
                .or_default()
                .insert(v.predicted == Prediction::Legitimate);
        }
        prop_assert!(by_group.values().all(|s| s.len() == 1));
    }

    #[test]
    fn silent_backend_rejects_everything(rows in corpus()) {
        let ws: Vec<Warning> = rows.into_iter().map(|(w, _, _)| w).collect();
        let bundles: HashMap<_, _> = ws.iter().map(|w| (w.id.clone(), empty_bundle(&w.id))).collect();
        let out = verify_all(&ws, &bundles, &Silent, &VerifierConfig::default(), Execution::Parallel { threads: 2 });
        prop_assert!(out.unresolved.is_empty());
        prop_assert_eq!(out.verdicts.len(), ws.len());
        prop_assert!(out.verdicts.iter().all(|v| v.predicted == Prediction::FalsePositive));
        let ids: BTreeSet<_> = out.verdicts.iter().map(|v| v.warning_id.clone()).collect();
        prop_assert_eq!(ids.len(), ws.len());
    }
}
