use ramsey_core::census::full_census;
use ramsey_core::graph::Graph;
use ramsey_core::heuristics::pretrain::{generate_rows, GenerateOptions};
use ramsey_core::heuristics::write_pretrain_csv;
use ramsey_core::runlog::{load_model, read_iterations, ConfigBuilder, CounterStore, RunConfig};
use ramsey_core::search::{prepare, SearchError};
use ramsey_core::verifier::{is_counterexample_by_search, RamseyParams};
use ramsey_core::{graph6, run, Error, Termination};
use std::path::Path;
use std::sync::atomic::AtomicBool;

fn config(dir: &Path, text: &str) -> RunConfig {
    ConfigBuilder::new()
        .parse_text(text)
        .unwrap()
        .set("output_dir", dir.to_str().unwrap())
        .unwrap()
        .build()
        .unwrap()
}

fn meta(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("run_meta.json")).unwrap()).unwrap()
}

#[test]
fn default_cadence_runs_exactly_1000_iterations() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "n = 14\ns = 4\nt = 4\nheuristic = 4PATH\nstarting_graph = RANDOM\nseed = 3\n");
    let result = run(&cfg, None).unwrap();
    assert_eq!(result.status, Termination::Completed);
    assert_eq!(result.iterations, 1000);
    assert_eq!(result.step_times.len(), 1000);

    let text = std::fs::read_to_string(dir.path().join("run.jsonl")).unwrap();
    assert_eq!(text.lines().count(), 1001);
    for line in text.lines() {
        serde_json::from_str::<serde_json::Value>(line).unwrap();
    }
    let records = read_iterations(&dir.path().join("run.jsonl")).unwrap();
    assert!(records.windows(2).all(|w| w[0].total_counters <= w[1].total_counters));
    assert!(records.iter().all(|r| r.elapsed_ms > 0.0));
    assert_eq!(records.iter().map(|r| r.new_counters).sum::<usize>(), result.counters.len());
    assert_eq!(meta(dir.path())["status"], "completed");

    // Every stored counterexample re-verifies by direct enumeration.
    let store = std::fs::read_to_string(dir.path().join("counters_4_4_14.g6")).unwrap();
    let saved = graph6::read_all(store.as_bytes()).unwrap();
    assert_eq!(saved.len(), result.counters.len());
    assert!(saved.iter().all(|g| is_counterexample_by_search(g, 4, 4)));
}

#[test]
fn interrupt_stops_before_the_next_step() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "n = 8\ns = 3\nt = 4\nheuristic = RANDOM\nstarting_graph = EMPTY\n");
    let flag = AtomicBool::new(true);
    let result = run(&cfg, Some(&flag)).unwrap();
    assert_eq!(result.status, Termination::Interrupted);
    assert_eq!(result.iterations, 0);
    let text = std::fs::read_to_string(dir.path().join("run.jsonl")).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert_eq!(meta(dir.path())["status"], "interrupted");
}

#[test]
fn training_follows_iter_batch_and_model_reloads() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("first");
    let cfg = config(
        &out,
        "n = 9\ns = 3\nt = 4\nheuristic = SCALED_DNN\nstarting_graph = RANDOM\niter_batch = 5\niter_batches = 4\n\
         learning_rate = 0.01\n",
    );
    let result = run(&cfg, None).unwrap();
    assert_eq!(result.iterations, 20);
    assert_eq!(result.training_invocations, 4);
    let records = read_iterations(&out.join("run.jsonl")).unwrap();
    let trained: Vec<u64> = records.iter().filter(|r| r.train_loss.is_some()).map(|r| r.iteration).collect();
    assert_eq!(trained, vec![5, 10, 15, 20]);

    let saved = load_model(&out.join("model.txt")).unwrap();
    assert_eq!(Some(&saved), result.model.as_ref());

    let mut reload = cfg.clone();
    reload.load_model = Some(out.join("model.txt"));
    let (search, _) = prepare(&reload).unwrap();
    let restored = search.heuristic().model().unwrap();
    let g = Graph::random_seeded(9, 0.5, 11).unwrap();
    let params = RamseyParams::new(3, 4, 9).unwrap();
    let census = full_census(&g);
    let mut rng = rand::rng();
    assert_eq!(
        search.heuristic().score(&census, &params, &mut rng).unwrap(),
        ramsey_core::Heuristic::new(ramsey_core::HeuristicKind::ScaledDnn, Some(saved))
            .unwrap()
            .score(&census, &params, &mut rng)
            .unwrap()
    );
    assert_eq!(restored.learning_rate(), 0.01);
}

#[test]
fn pretraining_lowers_loss_and_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("pre.csv");
    let rows = generate_rows(&GenerateOptions { n_max: 7, ..Default::default() });
    write_pretrain_csv(&rows, std::fs::File::create(&csv).unwrap()).unwrap();
    let out = dir.path().join("run");
    let cfg = config(
        &out,
        &format!(
            "n = 8\ns = 3\nt = 4\nheuristic = SCALED_DNN\nstarting_graph = EMPTY\niter_batches = 1\n\
             pretrain = 1\npretrain_data = {}\ntraining_epochs = 20\nlearning_rate = 0.01\n",
            csv.display()
        ),
    );
    let result = run(&cfg, None).unwrap();
    let report = result.pretrain_report.unwrap();
    assert_eq!(report.examples, rows.len());
    assert!(report.final_loss < report.initial_loss, "{report:?}");
    assert!(meta(&out)["pretrain_loss"].is_array());
}

#[test]
fn bad_start_files_fail_with_distinct_errors() {
    let dir = tempfile::tempdir().unwrap();
    let c5 = dir.path().join("c5.g6");
    std::fs::write(&c5, "Dhc\n").unwrap();
    let base = "n = 6\ns = 3\nt = 3\nheuristic = 4PATH\nstarting_graph = FROM_PRIOR\n";
    let attempt = |extra: &str| {
        let out = dir.path().join("out");
        let err = run(&config(&out, &format!("{base}{extra}")), None).unwrap_err();
        assert_eq!(meta(&out)["status"], "failed");
        err
    };
    let missing = attempt(&format!("starting_graph_path = {}\n", dir.path().join("none.g6").display()));
    assert!(matches!(missing, Error::Search(SearchError::StartFileUnreadable { .. })), "{missing}");
    let index = attempt(&format!("starting_graph_path = {}\nstarting_graph_index = 1\n", c5.display()));
    assert!(matches!(index, Error::Search(SearchError::StartIndexOutOfRange { .. })), "{index}");

    // K5 is no R(3,3,5) counterexample.
    let k5 = dir.path().join("k5.g6");
    std::fs::write(&k5, "D~{\n").unwrap();
    let not_counter = attempt(&format!("starting_graph_path = {}\n", k5.display()));
    assert!(matches!(not_counter, Error::Search(SearchError::StartNotCounterexample { .. })), "{not_counter}");
}

#[test]
fn concurrent_store_appends_never_interleave() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("counters_4_4_17.g6");
    let graphs: Vec<Graph> = (0..8).map(|s| Graph::random_seeded(40, 0.5, s).unwrap()).collect();
    std::thread::scope(|scope| {
        for g in &graphs {
            let path = &path;
            scope.spawn(move || {
                let mut store = CounterStore::open(path).unwrap();
                for _ in 0..50 {
                    store.append(g).unwrap();
                }
            });
        }
    });
    let text = std::fs::read_to_string(&path).unwrap();
    let read = graph6::read_all(text.as_bytes()).unwrap();
    assert_eq!(read.len(), 400);
    for g in &graphs {
        assert_eq!(read.iter().filter(|h| *h == g).count(), 50);
    }
}
