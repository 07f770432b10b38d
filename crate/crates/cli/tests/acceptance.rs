//! End-to-end acceptance criteria. Prints one `[PASS]`/`[FAIL]` line per
//! criterion and exits non-zero if any fails.

use std::collections::BTreeMap;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use adlgen::{run, Cli};
use adlgen_core::adl::{render_unit, AdlUnit, AttributeDecl, OperationDecl, ParamDecl};
use adlgen_core::config::{load_config_dir, parse_config, HeaderFields, Payload};
use adlgen_core::frontend::{extract_annotations, inject_annotation, AdlTag, SourceUnit};
use adlgen_core::model::PropertyKey;
use adlgen_core::reader::parse_adl;
use clap::Parser;
use proptest::prelude::*;
use proptest::test_runner::{Config as RunnerConfig, TestRunner};

type Check = Result<(), String>;
type Criterion = (&'static str, fn() -> Check);

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

struct Run {
    status: i32,
    out: String,
    err: String,
}

fn adlgen(args: &[&str]) -> Run {
    let cli = Cli::try_parse_from(std::iter::once("adlgen").chain(args.iter().copied())).expect("valid arguments");
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let status = run(cli, &mut out, &mut err);
    Run {
        status,
        out: String::from_utf8_lossy(&out).into_owned(),
        err: String::from_utf8_lossy(&err).into_owned(),
    }
}

fn path(p: &Path) -> &str {
    p.to_str().expect("UTF-8 path")
}

fn ensure(condition: bool, message: impl FnOnce() -> String) -> Check {
    if condition {
        Ok(())
    } else {
        Err(message())
    }
}

fn within(start: Instant, limit: Duration) -> Check {
    let elapsed = start.elapsed();
    ensure(elapsed < limit, || format!("took {elapsed:?}, limit {limit:?}"))
}

fn tempdir() -> tempfile::TempDir {
    tempfile::tempdir().expect("temporary directory")
}

fn golden_file() -> Check {
    let start = Instant::now();
    let out = tempdir();
    let header = fixtures().join("LArTBHVDData.h");
    let config = fixtures().join("config");
    let run = adlgen(&[
        "generate",
        path(&header),
        "--out",
        path(out.path()),
        "--config-dir",
        path(&config),
    ]);
    ensure(run.status == 0, || format!("status {}: {}", run.status, run.err))?;
    let produced = fs::read(out.path().join("LArTBEvent_ADL/LArTBHVDData.adl")).map_err(|e| e.to_string())?;
    let golden = fs::read(fixtures().join("golden/LArTBHVDData.adl")).map_err(|e| e.to_string())?;
    ensure(produced == golden, || {
        format!("output differs:\n{}", String::from_utf8_lossy(&produced))
    })?;
    within(start, Duration::from_secs(1))
}

fn inspector_config() -> Check {
    let text = fs::read_to_string(fixtures().join("config/adl.config")).map_err(|e| e.to_string())?;
    let entries = parse_config(&text).map_err(|e| e.to_string())?;
    let enums: Vec<(&str, &Payload)> = entries
        .iter()
        .filter(|e| matches!(e.payload, Payload::Enum { .. }))
        .map(|e| (e.key_path.rsplit('.').next().unwrap_or_default(), &e.payload))
        .collect();
    let strings = |items: &[&str]| items.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let expected = [
        (
            "ADLENABLED",
            Payload::Enum {
                values: strings(&["EXTERNAL", "ADLEXT", "ADL"]),
                names: strings(&["Explicit extern", "Extern in .adl", "Full ADL"]),
            },
        ),
        (
            "ADLINTERFACE",
            Payload::Enum {
                values: strings(&["interface", "DataObject", "ContainedObject"]),
                names: strings(&["interface", "DataObject", "ContainedObject"]),
            },
        ),
    ];
    let found: Vec<(&str, Payload)> = enums.into_iter().map(|(k, p)| (k, p.clone())).collect();
    ensure(found == expected, || format!("{found:?}"))?;

    let config = load_config_dir(&fixtures().join("config")).map_err(|e| e.to_string())?;
    let allowed = |key: &PropertyKey| config.schemas.get(key).and_then(|s| s.allowed.clone());
    ensure(
        allowed(&PropertyKey::ADLENABLED) == Some(strings(&["EXTERNAL", "ADLEXT", "ADL"]))
            && allowed(&PropertyKey::ADLINTERFACE) == Some(strings(&["interface", "DataObject", "ContainedObject"])),
        || "schemas not loaded from the file".to_string(),
    )
}

fn attribute_prefixes() -> Check {
    let mut matched = 0;
    for persistent in [false, true] {
        for readonly in [false, true] {
            // Two consecutive prepends: "readonly " first, then "persistent ".
            let mut oracle = String::from("private attribute short unit;");
            if readonly {
                oracle = format!("readonly {oracle}");
            }
            if persistent {
                oracle = format!("persistent {oracle}");
            }

            let dir = tempdir();
            let mut tags = Vec::new();
            if persistent {
                tags.push("@adl.persistent");
            }
            if readonly {
                tags.push("@adl.readonly");
            }
            let header = dir.path().join("c.h");
            let source = format!("class C {{\n  /** {} */\n  short unit;\n}};\n", tags.join(" "));
            fs::write(&header, source).map_err(|e| e.to_string())?;
            let out = dir.path().join("out");
            let run = adlgen(&["generate", path(&header), "--out", path(&out)]);
            ensure(run.status == 0, || run.err.clone())?;
            let text = fs::read_to_string(out.join("C.adl")).map_err(|e| e.to_string())?;
            if text.lines().any(|line| line == oracle) {
                matched += 1;
            }
        }
    }
    ensure(matched == 4, || format!("{matched}/4 combinations matched"))
}

fn ident() -> impl Strategy<Value = String> {
    "[A-Za-z_][A-Za-z0-9_]{0,8}"
}

fn adl_type() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("long".to_string()),
        Just("unsigned long".to_string()),
        ident(),
        (ident(), ident()).prop_map(|(ns, n)| format!("{ns}::{n}")),
    ];
    leaf.prop_recursive(2, 6, 3, |inner| {
        (ident(), prop::collection::vec(inner, 1..3)).prop_map(|(head, args)| format!("{head} <{}>", args.join(", ")))
    })
}

fn visibility() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["public", "protected", "private"]).prop_map(str::to_string)
}

fn unit_strategy() -> impl Strategy<Value = AdlUnit> {
    let attribute = (any::<bool>(), any::<bool>(), visibility(), adl_type(), ident()).prop_map(
        |(persistent, readonly, visibility, type_spelling, name)| AttributeDecl {
            persistent,
            readonly,
            visibility,
            type_spelling,
            name,
        },
    );
    let param = (adl_type(), ident()).prop_map(|(type_spelling, name)| ParamDecl {
        direction: "in".to_string(),
        type_spelling,
        name,
    });
    let operation = (visibility(), adl_type(), ident(), prop::collection::vec(param, 0..3)).prop_map(
        |(visibility, return_type, name, params)| OperationDecl {
            visibility,
            return_type,
            name,
            params,
        },
    );
    let field = "([A-Za-z0-9@._]([A-Za-z0-9@._ ]{0,16}[A-Za-z0-9@._])?)?";
    (
        (ident(), ident(), (field, field, field), any::<bool>()),
        prop::collection::vec(ident(), 0..3),
        prop::collection::vec(attribute, 0..5),
        prop::collection::vec(operation, 0..3),
    )
        .prop_map(
            |((class, kind, (title, author, version), extern_only), includes, attributes, operations)| {
                let mut unit = AdlUnit::new(&class, &kind, HeaderFields { title, author, version });
                unit.extern_only = extern_only;
                if !extern_only {
                    unit.includes = includes.into_iter().map(|i| format!("{i}.adl")).collect();
                    unit.attributes = attributes;
                    unit.operations = operations;
                }
                unit
            },
        )
}

fn annotation_strategy() -> impl Strategy<Value = Vec<(AdlTag, String)>> {
    let value = |tag: AdlTag| -> BoxedStrategy<String> {
        match tag {
            AdlTag::Enabled => prop::sample::select(vec!["EXTERNAL", "ADLEXT", "ADL"])
                .prop_map(str::to_string)
                .boxed(),
            AdlTag::Interface => prop::sample::select(vec!["interface", "DataObject", "ContainedObject"])
                .prop_map(str::to_string)
                .boxed(),
            AdlTag::Folder => "[A-Za-z_][A-Za-z0-9_]{0,10}".boxed(),
            AdlTag::Persistent | AdlTag::Readonly => Just(String::new()).boxed(),
        }
    };
    prop::collection::vec(
        prop::sample::select(AdlTag::ALL.to_vec()).prop_flat_map(move |tag| (Just(tag), value(tag))),
        0..6,
    )
}

fn round_trips() -> Check {
    let start = Instant::now();
    let mut runner = TestRunner::new(RunnerConfig {
        cases: 1000,
        failure_persistence: None,
        ..RunnerConfig::default()
    });
    runner
        .run(&unit_strategy(), |unit| {
            let parsed = parse_adl(&render_unit(&unit)).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert_eq!(parsed, unit);
            Ok(())
        })
        .map_err(|e| format!("unit round trip: {e}"))?;

    let header = "namespace ev {\n\nclass Hit {\npublic:\n  Hit();\n  long id() const;\nprivate:\n  int n;\n};\n\n}\n";
    runner
        .run(&(ident(), annotation_strategy()), |(prose, tags)| {
            let source = header.replace("class Hit", &format!("/** {prose} */\nclass Hit"));
            let mut text = source.clone();
            let mut expected = BTreeMap::new();
            for (tag, value) in &tags {
                text = inject_annotation(&text, "ev::Hit", &tag.key(), Some(value))
                    .map_err(|e| TestCaseError::fail(e.to_string()))?;
                expected.insert(tag.key().to_string(), value.clone());
            }
            let unit = SourceUnit::parse(&text, Path::new("hit.h")).map_err(|e| TestCaseError::fail(e.to_string()))?;
            let doc = unit.classes[0]
                .doc
                .as_ref()
                .ok_or_else(|| TestCaseError::fail("doc comment lost"))?;
            let found: BTreeMap<String, String> = extract_annotations(doc)
                .map_err(|e| TestCaseError::fail(e.to_string()))?
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect();
            prop_assert_eq!(found, expected);
            Ok(())
        })
        .map_err(|e| format!("annotation round trip: {e}"))?;
    within(start, Duration::from_secs(30))
}

fn skip_semantics() -> Check {
    let dir = tempdir();
    let lib = dir.path().join("lib");
    let src = dir.path().join("src");
    fs::create_dir_all(&lib).map_err(|e| e.to_string())?;
    fs::create_dir_all(&src).map_err(|e| e.to_string())?;
    fs::write(lib.join("Point.h"), "class Point {\n  double x;\n  double y;\n};\n").map_err(|e| e.to_string())?;
    fs::write(
        src.join("mixed.h"),
        "/** @adl.enabled EXTERNAL */\nclass Legacy {\n  int a;\n};\n\n\
         /** @adl.enabled ADLEXT\n *  @adl.interface DataObject */\nclass Declared {\n  int b;\n};\n\n\
         class Track {\n  Point start;\n};\n\n\
         /** @adl.enabled ADL */\nclass Vertex {\n  std::vector<Track> tracks;\n};\n",
    )
    .map_err(|e| e.to_string())?;
    let out = dir.path().join("out");
    let run = adlgen(&["generate", path(&src), "--import", path(&lib), "--out", path(&out)]);
    ensure(run.status == 0, || run.err.clone())?;

    let mut produced: Vec<String> = fs::read_dir(&out)
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok()?.file_name().into_string().ok())
        .collect();
    produced.sort();
    ensure(produced == ["Declared.adl", "Track.adl", "Vertex.adl"], || {
        format!("{produced:?}")
    })?;

    let declared = fs::read_to_string(out.join("Declared.adl")).map_err(|e| e.to_string())?;
    let expected = "#ifndef Declared_ADL\n#define Declared_ADL\n/**\n * @Title:  Module ADL generator for Together\n \
                    * @Author: Massimo_Marino@lbl.gov\n * @Version: 0.9.6\n */\n\nextern DataObject Declared;\n#endif\n";
    ensure(declared == expected, || format!("unexpected extern file:\n{declared}"))
}

fn constructor_exclusion() -> Check {
    let dir = tempdir();
    let header = dir.path().join("run.h");
    fs::write(
        &header,
        "class LArTBRun {\npublic:\n  LArTBRun();\n  LArTBRun(long number);\n  ~LArTBRun();\n  \
         double energy() const;\nprivate:\n  long m_number;\n};\n",
    )
    .map_err(|e| e.to_string())?;
    let out = dir.path().join("out");
    let run = adlgen(&["generate", path(&header), "--out", path(&out)]);
    ensure(run.status == 0, || run.err.clone())?;
    let text = fs::read_to_string(out.join("LArTBRun.adl")).map_err(|e| e.to_string())?;
    let operations: Vec<&str> = text.lines().filter(|l| l.ends_with(");")).collect();
    ensure(operations == ["public double energy();"], || format!("{operations:?}"))
}

fn messages() -> Check {
    let dir = tempdir();
    let empty = dir.path().join("empty");
    fs::create_dir_all(&empty).map_err(|e| e.to_string())?;
    let run = adlgen(&["generate", path(&empty)]);
    ensure((run.status, run.err.as_str()) == (2, "No open project\n"), || {
        format!("empty input: {} {:?}", run.status, run.err)
    })?;

    let header = fixtures().join("LArTBHVDData.h");
    let run = adlgen(&[
        "generate",
        path(&header),
        "--select",
        "Nothing*",
        "--out",
        path(dir.path()),
    ]);
    ensure(
        (run.status, run.err.as_str()) == (2, "No selection was made.\n"),
        || format!("empty selection: {} {:?}", run.status, run.err),
    )?;

    // The output root is a regular file, so nothing can be created below it.
    let blocker = dir.path().join("blocker");
    fs::write(&blocker, "").map_err(|e| e.to_string())?;
    let run = adlgen(&["generate", path(&header), "--out", path(&blocker)]);
    let prefix = "*** ERROR(Text): can't handle adl file for class ";
    ensure(
        run.status == 1 && run.err.lines().any(|l| l.starts_with(prefix)),
        || format!("write failure: {} {:?}", run.status, run.err),
    )
}

fn synthetic_header(classes: usize) -> String {
    let mut text = String::from("#include <vector>\n\nnamespace synth {\n\n");
    for i in 0..classes {
        let kind = ["interface", "DataObject", "ContainedObject"][i % 3];
        text.push_str(&format!("/** @adl.interface {kind} */\nclass C{i:02} {{\npublic:\n"));
        text.push_str(&format!(
            "  C{i:02}();\n  long value(int k, double w) const;\nprivate:\n"
        ));
        text.push_str(&format!("  int n{i};\n  std::vector<double> data;\n"));
        if i > 0 {
            text.push_str(&format!("  C{:02} previous;\n", i - 1));
        }
        text.push_str("};\n\n");
    }
    text.push_str("}\n");
    text
}

fn tree(root: &Path) -> Result<BTreeMap<PathBuf, Vec<u8>>, String> {
    let mut files = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).map_err(|e| e.to_string())? {
            let path = entry.map_err(|e| e.to_string())?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let bytes = fs::read(&path).map_err(|e| e.to_string())?;
                files.insert(path.strip_prefix(root).map_err(|e| e.to_string())?.to_path_buf(), bytes);
            }
        }
    }
    Ok(files)
}

fn determinism() -> Check {
    let start = Instant::now();
    let dir = tempdir();
    let header = dir.path().join("synth.h");
    fs::write(&header, synthetic_header(50)).map_err(|e| e.to_string())?;
    let mut trees = Vec::new();
    for name in ["first", "second"] {
        let out = dir.path().join(name);
        let run = adlgen(&["generate", path(&header), "--out", path(&out)]);
        ensure(run.status == 0, || run.err.clone())?;
        ensure(run.out.lines().count() == 50, || {
            format!("{} info lines", run.out.lines().count())
        })?;
        trees.push(tree(&out)?);
    }
    ensure(trees[0].len() == 50, || format!("{} files", trees[0].len()))?;
    ensure(trees[0] == trees[1], || "output trees differ".to_string())?;
    within(start, Duration::from_secs(5))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("golden file reproduced byte for byte", golden_file),
        ("inspector configuration enumerations", inspector_config),
        ("persistent/readonly prefix oracle", attribute_prefixes),
        ("randomized round trips", round_trips),
        ("skip semantics", skip_semantics),
        ("constructor exclusion", constructor_exclusion),
        ("message conformance", messages),
        ("deterministic generation", determinism),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (index, (name, check)) in criteria.iter().enumerate() {
        let result = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|payload| {
            let message = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {message}"))
        });
        match result {
            Ok(()) => println!("[PASS] {} {name}", index + 1),
            Err(reason) => {
                failed += 1;
                println!("[FAIL] {} {name}: {reason}", index + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
