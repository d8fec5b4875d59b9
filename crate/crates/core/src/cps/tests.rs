use super::*;
use crate::analysis::{analyze, AnalysisConfig};
use crate::corpus;
use crate::frontend::{anf, parse, pretty_target, AnfBinding, AnfTerm};
use crate::kernel::{arity, desugar, Ident};

fn compile(src: &str) -> AnfTerm {
    anf(&desugar(&parse(src).unwrap()))
}

fn selected(t: &AnfTerm, cfg: AnalysisConfig) -> Vars {
    analyze(t, cfg).unwrap().suspend
}

#[test]
fn tail_call_examples() {
    let (iter, t16, t17) = (Ident::new("iter", 1), Ident::new("t16", 2), Ident::new("t17", 3));
    let call = AnfTerm::Let(
        t17.clone(),
        AnfBinding::App(iter, t16),
        Box::new(AnfTerm::Ret(t17.clone())),
    );
    assert!(tail_call(&call));
    assert!(!tail_call(&compile("let a = 1 in let b = a in b")));
    assert!(!tail_call(&AnfTerm::Ret(t17)));
}

#[test]
fn empty_selection_is_identity() {
    for (name, src) in corpus::ALL {
        let t = compile(src);
        let out = selective_cps(&Vars::new(), &t).unwrap();
        assert_eq!(out, TargetTerm::from_anf(&t), "{name}");
        assert_eq!(out.count_sus(), (0, 0));
    }
}

#[test]
fn selective_coin_model_has_one_weight_suspension() {
    let t = compile(corpus::COIN);
    let vars = selected(&t, AnalysisConfig::WEIGHT);
    let out = selective_cps(&vars, &t).unwrap();
    assert_eq!(out.count_sus(), (0, 1));
    assert_eq!(out.count_cps_consts(), 0);

    // iter takes the continuation first
    let mut rec = None;
    out.walk(&mut |s| {
        if let TargetTerm::LetRec { name, value, rest } = s {
            rec = Some((name.clone(), (**value).clone(), (**rest).clone()));
        }
    });
    let (iter, value, mut rest) = rec.unwrap();
    match &value {
        TargetTerm::Lam {
            kind: LamKind::CpsEntry,
            body,
            ..
        } => assert!(matches!(
            **body,
            TargetTerm::Lam {
                kind: LamKind::CpsBody,
                ..
            }
        )),
        other => panic!("iter is not transformed: {other:?}"),
    }

    // the recursive call passes the continuation through in tail position
    let mut tail_calls = 0;
    value.walk(&mut |s| {
        if let TargetTerm::App(f, _) = s {
            if let TargetTerm::App(g, k) = &**f {
                if **g == TargetTerm::var(&iter) && matches!(**k, TargetTerm::Var(ref v) if v.name() == "%k") {
                    tail_calls += 1;
                }
            }
        }
    });
    assert_eq!(tail_calls, 1);

    // the outer call gets a continuation returning the assumed value
    while let TargetTerm::Let(_, _, r) = &rest {
        if matches!(**r, TargetTerm::App(..)) {
            break;
        }
        rest = (**r).clone();
    }
    let TargetTerm::Let(k, lam, call) = rest else { panic!() };
    let TargetTerm::Lam {
        body,
        kind: LamKind::Continuation,
        ..
    } = *lam
    else {
        panic!("{lam:?}")
    };
    assert!(matches!(*body, TargetTerm::Var(ref a) if a.name() == "a1"));
    let TargetTerm::App(f, _) = *call else { panic!() };
    assert_eq!(*f, TargetTerm::app(TargetTerm::var(&iter), TargetTerm::var(&k)));
}

#[test]
fn selective_coin_model_prints_one_weight_marker() {
    let t = compile(corpus::COIN);
    let text = pretty_target(&selective_cps(&selected(&t, AnalysisConfig::WEIGHT), &t).unwrap());
    assert_eq!(text.matches("Sus_weight").count(), 1, "{text}");
    assert_eq!(text.matches("Sus_assume").count(), 0, "{text}");
}

#[test]
fn full_cps_wraps_every_intrinsic() {
    let t = compile(corpus::COIN);
    let out = selective_cps(&all_labels(&t), &t).unwrap();
    let (assumes, weights) = out.count_sus();
    assert_eq!((assumes, weights), (1, 1));
    let mut direct_fns = 0;
    out.walk(&mut |s| {
        if let TargetTerm::Const(c) = s {
            if arity(c) > 0 {
                direct_fns += 1;
            }
        }
    });
    assert_eq!(direct_fns, 0);
    assert_eq!(out.count_cps_consts(), 5);
    let text = pretty_target(&out);
    assert!(text.contains("head_cps"), "{text}");
}

#[test]
fn both_sources_select_more_than_one() {
    let t = compile(corpus::COIN);
    let w = selected(&t, AnalysisConfig::WEIGHT);
    let both = selected(&t, AnalysisConfig::BOTH);
    assert!(w.is_subset(&both));
    let out = selective_cps(&both, &t).unwrap();
    assert_eq!(out.count_sus(), (1, 1));
}

#[test]
fn non_uniform_selection_is_rejected() {
    let t = compile("let f = lam x. weight x in f 0.5");
    let app = t
        .bindings()
        .find(|(_, b)| matches!(b, AnfBinding::App(..)))
        .unwrap()
        .0
        .clone();
    let err = selective_cps(&[app.clone()].into(), &t).unwrap_err();
    assert!(
        matches!(err, CpsError::MalformedVars { app: ref a, app_selected: true, .. } if *a == app),
        "{err}"
    );
}

#[test]
fn selected_if_outside_tail_position_binds_a_join_point() {
    let t = compile("let c = true in let r = if c then weight 0.5 else () in r");
    let out = selective_cps(&selected(&t, AnalysisConfig::WEIGHT), &t).unwrap();
    let mut conts = 0;
    out.walk(&mut |s| {
        if matches!(
            s,
            TargetTerm::Lam {
                kind: LamKind::Continuation,
                ..
            }
        ) {
            conts += 1;
        }
    });
    assert!(conts >= 1);
    assert_eq!(out.count_sus(), (0, 1));
}

#[test]
fn top_level_tail_suspension_gets_identity_continuation() {
    let t = compile("weight 0.5");
    let out = selective_cps(&selected(&t, AnalysisConfig::WEIGHT), &t).unwrap();
    let TargetTerm::Let(_, _, sus) = out else {
        panic!("{out:?}")
    };
    let TargetTerm::SusWeight { label, cont, .. } = *sus else {
        panic!()
    };
    assert_eq!(
        *cont,
        TargetTerm::lam(label.clone(), TargetTerm::var(&label), LamKind::Continuation)
    );
}
