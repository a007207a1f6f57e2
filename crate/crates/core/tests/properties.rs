use std::sync::OnceLock;

use proptest::prelude::*;

use hottcheck::diag::{Code, Span};
use hottcheck::kernel::env::instance;
use hottcheck::kernel::{Ctx, Elab, Ev};
use hottcheck::loopcalc::{circle_shape, oracle_exponent_sum, power, recognize, winding, word_term, LoopWord};
use hottcheck::parser::resolve::Resolver;
use hottcheck::parser::{parse_term, print};
use hottcheck::session::Session;
use hottcheck::stdlib::{self, audit, axioms_in_cone, parse_sanctioned, shipped_manifest};
use hottcheck::syntax::{alpha_equal, name, shift, strip_locs, substitute, well_scoped, Binder, Level, Term};

fn corpus() -> &'static Session {
    static S: OnceLock<Session> = OnceLock::new();
    S.get_or_init(|| stdlib::load_corpus().unwrap_or_else(|d| panic!("{}", d.human())).0)
}

fn sp() -> Span {
    Span::new(0, 0, 0)
}

// Random well-scoped terms over a small signature.
fn arb_term(depth: usize) -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        (0..depth.max(1) + 2).prop_map(Term::Var),
        (0u32..3).prop_map(|l| Term::Universe(Level::Lit(l))),
        Just(Term::Nat),
        Just(Term::Zero),
        Just(Term::Const(name("concat"), vec![Level::Lit(0)])),
    ];
    leaf.prop_recursive(5, 48, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(f, a)| Term::app(f, a)),
            inner.clone().prop_map(|b| Term::lam(Binder::explicit("x"), b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::pi(Binder::explicit("y"), a, b)),
            (inner.clone(), inner.clone(), inner.clone())
                .prop_map(|(a, x, y)| Term::Id(a.into(), x.into(), y.into())),
            inner.clone().prop_map(|t| Term::Succ(t.into())),
            (inner.clone(), inner).prop_map(|(a, b)| Term::Pair(a.into(), b.into())),
        ]
    })
}

fn arb_word() -> impl Strategy<Value = LoopWord> {
    let leaf = prop_oneof![Just(LoopWord::Refl), Just(LoopWord::Loop)];
    leaf.prop_recursive(12, 256, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(LoopWord::inv),
            (inner.clone(), inner).prop_map(|(a, b)| LoopWord::concat(a, b)),
        ]
    })
}

proptest! {
    #[test]
    fn shift_up_then_down_is_identity(t in arb_term(3), c in 0usize..4) {
        prop_assert_eq!(shift(&shift(&t, c, 1), c, -1), t);
    }

    #[test]
    fn substituting_into_a_weakened_term_is_identity(t in arb_term(3), u in arb_term(3)) {
        prop_assert_eq!(substitute(&shift(&t, 0, 1), 0, &u), t);
    }

    #[test]
    fn printed_terms_resolve_back(t in arb_term(0)) {
        let g = &corpus().globals;
        // Only closed terms have a meaning without a context.
        prop_assume!(well_scoped(&t, 0));
        let src = print(&t);
        let st = parse_term(0, &src).unwrap();
        let back = Resolver::new(g, vec![]).term(&st).unwrap();
        prop_assert!(alpha_equal(&strip_locs(&back), &t), "{} reparsed differently", src);
    }

    #[test]
    fn winding_is_a_homomorphism(a in arb_word(), b in arb_word()) {
        prop_assert_eq!(winding(&LoopWord::concat(a.clone(), b.clone())), winding(&a) + winding(&b));
        prop_assert_eq!(winding(&LoopWord::inv(a.clone())), -winding(&a));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn kernel_winding_matches_the_oracle(w in arb_word().prop_filter("depth", |w| w.depth() <= 12)) {
        let g = &corpus().globals;
        let c = circle_shape(g, "Circle").unwrap();
        let t = word_term(&w, &c, &name("concat"), &name("inv"));
        let got = recognize(g, &t, sp()).unwrap();
        prop_assert_eq!(winding(&got), oracle_exponent_sum(&w));
    }
}

#[test]
fn powers_check_and_wind_correctly() {
    let g = &corpus().globals;
    let c = circle_shape(g, "Circle").unwrap();
    let ev = Ev::new(g);
    let want_src = parse_term(0, "Id Circle base base").unwrap();
    let want = ev.eval(&Vec::new(), &Resolver::new(g, vec![]).term(&want_src).unwrap());
    for k in -50i64..=50 {
        let w = power(k);
        assert_eq!(oracle_exponent_sum(&w), k);
        let t = word_term(&w, &c, &name("concat"), &name("inv"));
        let (_, ty) = Elab::new(g).infer(&Ctx::new(), &t, sp()).unwrap();
        assert!(ev.conv(0, &ty, &want), "power {k} has the wrong type");
        assert_eq!(winding(&recognize(g, &t, sp()).unwrap()), k);
    }
}

#[test]
fn every_corpus_term_round_trips_through_the_printer() {
    let g = &corpus().globals;
    let mut n = 0;
    for d in g.decls() {
        let levels = vec![0; d.nlevels()];
        let inst = instance(g, &d, &levels).unwrap();
        let mut terms = vec![strip_locs(&inst.ty)];
        terms.extend(inst.body.iter().map(strip_locs));
        for t in terms {
            let src = print(&t);
            let st = parse_term(0, &src).unwrap_or_else(|e| panic!("{}: `{src}` does not parse: {e:?}", d.name));
            let back = Resolver::new(g, vec![])
                .term(&st)
                .unwrap_or_else(|e| panic!("{}: `{src}` does not resolve: {e:?}", d.name));
            assert!(alpha_equal(&strip_locs(&back), &t), "{}: `{src}` reparsed differently", d.name);
            n += 1;
        }
    }
    assert!(n > 300);
}

#[test]
fn normal_forms_are_stable_and_well_typed() {
    let g = &corpus().globals;
    let ev = Ev::new(g);
    let mut n = 0;
    for d in g.decls() {
        let levels = vec![0; d.nlevels()];
        let inst = instance(g, &d, &levels).unwrap();
        let Some(body) = &inst.body else { continue };
        if d.kind.is_generated() {
            continue;
        }
        let nf = ev.normalize(0, body);
        assert_eq!(ev.normalize(0, &nf), nf, "{}: normalization is not idempotent", d.name);
        Elab::new(g)
            .check(&Ctx::new(), &nf, &inst.ty_val, d.span)
            .unwrap_or_else(|e| panic!("{}: normal form fails to check: {e:?}", d.name));
        n += 1;
    }
    assert!(n > 150);
}

#[test]
fn universe_in_itself_is_rejected_at_every_level() {
    for k in 0..5 {
        let mut s = Session::with_prelude();
        let d = s.add_source("t.hott", &format!("def t : Type {k} := Type {k}")).unwrap_err();
        assert_eq!(d.code, Code::Univ);
    }
}

#[test]
fn the_audit_catches_an_unsanctioned_axiom() {
    let (mut s, mut declared) = stdlib::load_corpus().unwrap();
    let extra = "axiom cheat : loop = refl base\ndef sneaky : loop = refl base := cheat\n";
    let names = s.add_source("corpus/extra.hott", extra).unwrap();
    declared.push(("extra.hott".to_string(), names));
    let mut manifest_text = stdlib::MANIFEST.to_string();
    manifest_text.push_str("extra.hott\tsneaky\tproved\tcheat test\n");
    let m = hottcheck::stdlib::Manifest::parse(&manifest_text).unwrap();
    let a = audit(&s.globals, &m, &parse_sanctioned(stdlib::SANCTIONED), &declared);
    assert!(!a.ok());
    assert!(a.unsanctioned.iter().any(|n| n == "cheat"));
    assert!(a.dishonest.iter().any(|(n, bad)| n == "sneaky" && bad.iter().any(|b| b == "cheat")));
    // The shipped corpus itself is clean.
    let (s, declared) = stdlib::load_corpus().unwrap();
    assert!(audit(&s.globals, &shipped_manifest(), &parse_sanctioned(stdlib::SANCTIONED), &declared).ok());
}

#[test]
fn loop_nontriviality_rests_on_univalence() {
    let g = &corpus().globals;
    let ax = axioms_in_cone(g, "loop-nontrivial");
    assert!(ax.iter().any(|n| &**n == "ua"), "{ax:?}");
}
