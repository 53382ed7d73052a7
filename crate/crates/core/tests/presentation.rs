use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use smachine::constructors::*;
use smachine::machine::{SetTag, SMachine};
use smachine::presentation::*;
use smachine::word::{cyclic_key, Letter, Word};

struct Fixture {
    b: MainMachineBundle,
    trimmed: SMachine,
    m: Presentation,
    g: Presentation,
}

fn fx() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let b = build_main_machine(&ToyRecognizer::even(), DEFAULT_M, DEFAULT_L).unwrap();
        let trimmed = build_trimmed_machine(&b).unwrap();
        let m = compile_group_m(&b);
        let g = compile_group_g(&b).unwrap();
        Fixture { b, trimmed, m, g }
    })
}

fn has_relator(p: &Presentation, w: &Word) -> bool {
    let key = cyclic_key(w);
    p.relators.iter().any(|r| cyclic_key(&r.word) == key)
}

fn gen(p: &Presentation, g: GroupGenerator) -> u32 {
    p.gen(&g).unwrap()
}

#[test]
fn relator_counts_follow_rule_shapes() {
    let f = fx();
    let (n, l) = (f.b.n(), f.b.l() as usize);
    let mut q = 0;
    let mut a = 0;
    for r in f.b.machine.positive_rules() {
        let copies = match r.tag.set {
            Some(SetTag::Start | SetTag::Set(1) | SetTag::Set(2) | SetTag::Transition(1 | 2)) => l,
            _ => 1,
        };
        q += copies * n;
        a += copies * r.domains.iter().map(|d| d.len()).sum::<usize>();
    }
    assert_eq!(f.m.count(RelatorTag::ThetaQ), q);
    assert_eq!(f.m.count(RelatorTag::ThetaA), a);
    assert_eq!(f.m.count(RelatorTag::Hub), 0);
    assert_eq!(f.g.relators.len(), f.m.relators.len() + 2);
}

#[test]
fn every_relator_letter_is_declared_and_relators_are_cyclically_reduced() {
    let f = fx();
    for r in &f.g.relators {
        let v = r.word.letters();
        assert!(v.iter().all(|l| (l.sym as usize) < f.g.num_generators()));
        assert!(r.word.is_reduced());
        assert!(!v.first().unwrap().cancels(*v.last().unwrap()));
    }
}

#[test]
fn set4_rule_commutes_with_its_domain() {
    let f = fx();
    let m = &f.b.machine;
    let r = m.positive_rules().find(|r| r.tag.set == Some(SetTag::Set(4))).unwrap();
    let (sec, dom) = r.domains.iter().enumerate().find(|(_, d)| !d.is_empty()).unwrap();
    let a = *dom.iter().next().unwrap();
    let ag = gen(&f.m, GroupGenerator::letter(GenKind::Tape, m.alphabet().name(a), None));
    let th = gen(&f.m, GroupGenerator::theta(r.label.clone(), sec + 1, None));
    let w = Word(vec![Letter::new(ag), Letter::new(th), Letter::inverse_of(ag), Letter::inverse_of(th)]);
    assert!(has_relator(&f.m, &w));
}

#[test]
fn t23_relators_erase_superscripts_on_top() {
    let f = fx();
    let m = &f.b.machine;
    let r = m.positive_rules().find(|r| r.tag.set == Some(SetTag::Transition(2))).unwrap();
    let sec = m.input_sector.unwrap();
    assert!(!r.domains[sec].is_empty());
    let a = m.alphabet().name(*r.domains[sec].iter().next().unwrap()).to_string();
    for i in [1, 5, 12] {
        let a_i = gen(&f.m, GroupGenerator::letter(GenKind::Tape, &a, Some(i)));
        let a0 = gen(&f.m, GroupGenerator::letter(GenKind::Tape, &a, None));
        let th = gen(&f.m, GroupGenerator::theta(r.label.clone(), sec + 1, Some(i)));
        let w = Word(vec![Letter::new(a_i), Letter::new(th), Letter::inverse_of(a0), Letter::inverse_of(th)]);
        assert!(has_relator(&f.m, &w), "superscript {i}");
    }
}

#[test]
fn theta_zero_is_theta_n_of_the_previous_copy() {
    let f = fx();
    let m = &f.b.machine;
    let r = m.positive_rules().find(|r| r.tag.set == Some(SetTag::Set(2))).unwrap();
    let t = gen(&f.m, GroupGenerator::letter(GenKind::Q, "t", Some(1)));
    let th1 = gen(&f.m, GroupGenerator::theta(r.label.clone(), 1, Some(1)));
    let th_n = gen(&f.m, GroupGenerator::theta(r.label.clone(), f.b.n(), Some(12)));
    let w = Word(vec![Letter::new(t), Letter::new(th1), Letter::inverse_of(t), Letter::inverse_of(th_n)]);
    assert!(has_relator(&f.m, &w));
    assert!(f.m.generators().iter().all(|g| g.index != Some(0)));
}

#[test]
fn hubs_have_length_l_times_n() {
    let f = fx();
    let hubs: Vec<_> = f.g.relators.iter().filter(|r| r.tag == RelatorTag::Hub).collect();
    assert_eq!(hubs.len(), 2);
    for h in hubs {
        assert_eq!(h.word.len(), f.b.l() as usize * f.b.n());
        assert_eq!(mu(&f.g, &h.word).unwrap(), 0);
    }
}

#[test]
fn mu_kills_every_relator_and_counts_t() {
    let f = fx();
    for r in &f.g.relators {
        assert_eq!(mu(&f.g, &r.word).unwrap(), 0, "{}", f.g.format_word(&r.word));
    }
    let w = f.g.lift(&f.b.machine, f.b.w_kk(2, 2).letters()).unwrap();
    assert_eq!(mu(&f.g, &w).unwrap(), 1);
    assert_eq!(mu(&f.g, &w.power(f.b.l() as usize)).unwrap(), 0);
    let mut bogus = w.clone();
    bogus.0.push(Letter::new(99_999));
    assert!(mu(&f.g, &bogus).is_err());
}

#[test]
fn nu_kills_theta_a_relators() {
    let f = fx();
    for r in f.g.relators.iter().filter(|r| r.tag == RelatorTag::ThetaA) {
        assert!(nu(&f.g, &r.word).unwrap().is_empty());
    }
    let q = f.g.relators.iter().find(|r| r.tag == RelatorTag::ThetaQ).unwrap();
    assert!(matches!(nu(&f.g, &q.word), Err(smachine::Error::QLetterPresent(_))));
    let tape: Vec<u32> =
        (0..f.g.num_generators() as u32).filter(|&s| f.g.generator(s).kind == GenKind::Tape).take(2).collect();
    let w = Word(vec![Letter::new(tape[0]), Letter::inverse_of(tape[1])]);
    assert!(nu(&f.g, &w).unwrap().is_empty());
}

#[test]
fn theta_q_relators_balance_each_rule() {
    let f = fx();
    for r in f.g.relators.iter().filter(|r| r.tag == RelatorTag::ThetaQ) {
        let mut sums: BTreeMap<&str, i64> = BTreeMap::new();
        for l in r.word.letters() {
            let g = f.g.generator(l.sym);
            if g.kind == GenKind::Theta {
                *sums.entry(g.name.as_str()).or_default() += if l.inv { -1 } else { 1 };
            }
        }
        assert!(sums.values().all(|&s| s == 0));
    }
}

#[test]
fn superscript_discipline_holds() {
    check_superscripts(&fx().g).unwrap();
}

#[test]
fn tape_inventory_has_plain_and_l_copies() {
    let f = fx();
    let alpha = f.b.machine.alphabet();
    let tapes: BTreeSet<&str> = f
        .m
        .generators()
        .iter()
        .filter(|g| g.kind == GenKind::Tape)
        .map(|g| g.name.as_str())
        .collect();
    for name in tapes {
        assert!(alpha.lookup(name).is_some());
        for i in std::iter::once(None).chain((1..=f.b.l()).map(Some)) {
            assert!(f.m.gen(&GroupGenerator::letter(GenKind::Tape, name, i)).is_ok());
        }
    }
}

#[test]
fn trimmed_groups_embed_by_name() {
    let f = fx();
    let (mbar, gbar) = compile_trimmed(&f.b, &f.trimmed).unwrap();
    assert!(mbar.generators().iter().all(|g| g.sup.is_none()));
    let erased: BTreeSet<GroupGenerator> = f.m.generators().iter().map(|g| g.erased()).collect();
    assert!(mbar.generators().iter().all(|g| erased.contains(g)));
    assert_eq!(gbar.relators.len(), mbar.relators.len() + 1);
    for r in &mbar.relators {
        let image = Word(
            r.word.letters().iter().map(|l| Letter::signed(f.g.gen(mbar.generator(l.sym)).unwrap(), l.inv)).collect(),
        );
        assert!(has_relator(&f.g, &image));
    }
}

#[test]
fn hnn_extensions_add_one_generator_and_relator() {
    let f = fx();
    let g0 = hnn_gk(&f.g, &f.b, 0).unwrap();
    assert_eq!(g0.num_generators(), f.g.num_generators() + 1);
    assert_eq!(g0.relators.len(), f.g.relators.len() + 1);
    let x = g0.gen(&GroupGenerator::letter(GenKind::Stable, "x", None)).unwrap();
    let w = g0.lift(&f.b.machine, f.b.w_kk(0, 0).letters()).unwrap();
    let ac = g0.lift(&f.b.machine, f.b.w_ac().letters()).unwrap();
    let mut rel = vec![Letter::new(x)];
    rel.extend(w.0);
    rel.push(Letter::inverse_of(x));
    rel.extend(ac.inverse().0);
    assert!(has_relator(&g0, &Word(rel)));

    let (_, gbar) = compile_trimmed(&f.b, &f.trimmed).unwrap();
    let gy = hnn_gbar(&gbar, &f.trimmed).unwrap();
    assert_eq!(gy.num_generators(), gbar.num_generators() + 1);
    let y = gy.gen(&GroupGenerator::letter(GenKind::Stable, "y", None)).unwrap();
    let ac = gy.lift(&f.trimmed, f.trimmed.end_configuration().letters()).unwrap();
    let mut rel = vec![Letter::new(y)];
    rel.extend(ac.0.iter().copied());
    rel.push(Letter::inverse_of(y));
    rel.extend(ac.inverse().0);
    assert!(has_relator(&gy, &Word(rel)));
}

#[test]
fn plain_export_round_trips_and_is_stable() {
    let f = fx();
    let text = export(&f.g, ExportFormat::Plain);
    assert_eq!(text, export(&compile_group_g(&f.b).unwrap(), ExportFormat::Plain));
    let back = parse_plain(&text).unwrap();
    assert_eq!(back, f.g);
    let hub2 = text.lines().filter(|l| l.ends_with("# hub")).nth(1).unwrap();
    assert_eq!(hub2.split(" # ").next().unwrap().split('.').count(), f.b.l() as usize * f.b.n());
}

#[test]
fn empty_presentation_exports_generators_only() {
    let p = Presentation::from_parts(
        "free",
        3,
        1,
        BTreeSet::new(),
        [GroupGenerator::letter(GenKind::Q, "q", None)],
        vec![],
    );
    let plain = export(&p, ExportFormat::Plain);
    assert!(!plain.contains("relators"));
    assert_eq!(parse_plain(&plain).unwrap(), p);
    let gap = export(&p, ExportFormat::Gap);
    assert_eq!(gap.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>(), ["F := FreeGroup([\"q\"]);;"]);
}

#[test]
fn gap_export_indexes_generators() {
    let f = fx();
    let gap = export(&f.m, ExportFormat::Gap);
    assert!(gap.contains("F := FreeGroup(["));
    assert!(gap.trim_end().ends_with("G := F / rels;;"));
    let max = gap
        .split("F.")
        .skip(1)
        .filter_map(|s| s.split(|c: char| !c.is_ascii_digit()).next()?.parse::<usize>().ok())
        .max()
        .unwrap();
    assert!(max <= f.m.num_generators());
}

#[test]
fn toy_machine_compiles_without_superscripts() {
    let toy = ToyRecognizer::even().machine().unwrap();
    let p = compile_plain(&toy, 5);
    // er: 3 parts + alpha in sector 0; acc: 3 parts.
    assert_eq!(p.count(RelatorTag::ThetaQ), 6);
    assert_eq!(p.count(RelatorTag::ThetaA), 1);
    assert!(p.t_letters.is_empty());
}
