//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails. Reference values come from small
//! independent oracles written here, not from the library under test.

use std::path::Path;
use std::time::Instant;

use ascprobe_cli::commands::{self, GDV_FILE};
use ascprobe_cli::RunConfig;
use ascprobe_core::corpus::{
    build_vocab, encode, generate_corpus, split, EncodedCorpus, GrammarSpec, PaddingSide, Vocabulary, PAD_ID,
};
use ascprobe_core::geometry::{
    classical_mds, gdv, perplexity_calibration, tsne, LabeledPointSet, ProjectionDiagnostics, TsneConfig,
};
use ascprobe_core::probe::{extract_all, LayerId};
use ascprobe_core::rnn::{
    backward, forward, init_params, loss, loss_and_gradients, train, Gradients, ModelConfig, ModelParams,
};
use ascprobe_core::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

type Outcome = Result<String, String>;

fn check(cond: bool, ok: String, bad: String) -> Outcome {
    if cond {
        Ok(ok)
    } else {
        Err(bad)
    }
}

// ------------------------------------------------------------------ oracles

/// Straight transcription of the GDV definition: z-score with population
/// std, halve, mean pairwise distances, combine.
fn gdv_oracle(points: &[Vec<f64>], labels: &[usize], classes: usize) -> f64 {
    let n = points.len();
    let d = points[0].len();
    let mut z = vec![vec![0.0; d]; n];
    for j in 0..d {
        let mean = points.iter().map(|p| p[j]).sum::<f64>() / n as f64;
        let sd = (points.iter().map(|p| (p[j] - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
        for i in 0..n {
            z[i][j] = 0.5 * (points[i][j] - mean) / sd;
        }
    }
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let mut intra = 0.0;
    for l in 0..classes {
        let idx: Vec<usize> = (0..n).filter(|&i| labels[i] == l).collect();
        let mut s = 0.0;
        let mut c = 0.0;
        for a in 0..idx.len() {
            for b in a + 1..idx.len() {
                s += dist(&z[idx[a]], &z[idx[b]]);
                c += 1.0;
            }
        }
        intra += s / c;
    }
    let mut inter = 0.0;
    for l in 0..classes {
        for m in l + 1..classes {
            let mut s = 0.0;
            let mut c = 0.0;
            for i in (0..n).filter(|&i| labels[i] == l) {
                for k in (0..n).filter(|&k| labels[k] == m) {
                    s += dist(&z[i], &z[k]);
                    c += 1.0;
                }
            }
            inter += s / c;
        }
    }
    let lf = classes as f64;
    (intra / lf - 2.0 * inter / (lf * (lf - 1.0))) / (d as f64).sqrt()
}

fn to_matrix(rows: &[Vec<f64>]) -> Matrix {
    Matrix::from_vec(rows.len(), rows[0].len(), rows.concat())
}

fn lib_gdv(rows: &[Vec<f64>], labels: &[usize], classes: usize) -> f64 {
    gdv(&LabeledPointSet::new(to_matrix(rows), labels.to_vec(), classes).unwrap()).unwrap().gdv
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

// ------------------------------------------------------------------ 1

fn c1_gdv_analytic() -> Outcome {
    let rows = vec![vec![0.0], vec![1.0], vec![10.0], vec![11.0]];
    let labels = [0, 0, 1, 1];
    let oracle = gdv_oracle(&rows, &labels, 2);
    let got = lib_gdv(&rows, &labels, 2);
    check(
        (oracle + 0.8956).abs() < 1e-4 && (got - oracle).abs() < 1e-4,
        format!("GDV {got:.6}, oracle {oracle:.6}, reference -0.8956"),
        format!("GDV {got:.6} vs oracle {oracle:.6} vs -0.8956"),
    )
}

// ------------------------------------------------------------------ 2

struct Instance {
    rows: Vec<Vec<f64>>,
    labels: Vec<usize>,
    classes: usize,
}

fn random_instance(rng: &mut ChaCha8Rng) -> Instance {
    let classes = rng.random_range(2..=5);
    let d = rng.random_range(1..=10);
    let per: Vec<usize> = (0..classes).map(|_| rng.random_range(2..=15)).collect();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (l, &count) in per.iter().enumerate() {
        let center: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
        for _ in 0..count {
            rows.push(center.iter().map(|c| c + gauss(rng)).collect());
            labels.push(l);
        }
    }
    // Shuffle rows so classes interleave.
    for i in (1..rows.len()).rev() {
        let j = rng.random_range(0..=i);
        rows.swap(i, j);
        labels.swap(i, j);
    }
    Instance { rows, labels, classes }
}

fn c2_gdv_invariances() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let trials = 100;
    let mut worst_affine = 0.0f64;
    for t in 0..trials {
        let inst = random_instance(&mut rng);
        let base = lib_gdv(&inst.rows, &inst.labels, inst.classes);
        let d = inst.rows[0].len();

        let mut perm: Vec<usize> = (0..d).collect();
        for i in (1..d).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let permuted: Vec<Vec<f64>> = inst.rows.iter().map(|r| perm.iter().map(|&j| r[j]).collect()).collect();
        let g = lib_gdv(&permuted, &inst.labels, inst.classes);
        if g != base {
            return Err(format!("trial {t}: permutation changed GDV {base} -> {g}"));
        }

        let mut relabel: Vec<usize> = (0..inst.classes).collect();
        for i in (1..inst.classes).rev() {
            relabel.swap(i, rng.random_range(0..=i));
        }
        let labels: Vec<usize> = inst.labels.iter().map(|&l| relabel[l]).collect();
        let g = lib_gdv(&inst.rows, &labels, inst.classes);
        if g != base {
            return Err(format!("trial {t}: relabeling changed GDV {base} -> {g}"));
        }

        let (a, b) = (rng.random_range(0.1..10.0), rng.random_range(-10.0..10.0));
        let global: Vec<Vec<f64>> = inst.rows.iter().map(|r| r.iter().map(|x| a * x + b).collect()).collect();
        let scales: Vec<(f64, f64)> =
            (0..d).map(|_| (rng.random_range(0.1..10.0) * if rng.random() { 1.0 } else { -1.0 }, rng.random_range(-10.0..10.0))).collect();
        let per_dim: Vec<Vec<f64>> =
            inst.rows.iter().map(|r| r.iter().zip(&scales).map(|(x, (s, o))| s * x + o).collect()).collect();
        for variant in [global, per_dim] {
            let g = lib_gdv(&variant, &inst.labels, inst.classes);
            let rel = (g - base).abs() / base.abs();
            worst_affine = worst_affine.max(rel);
            if rel > 1e-12 {
                return Err(format!("trial {t}: affine rescaling moved GDV by {rel:.2e} relative"));
            }
        }
    }
    Ok(format!("{trials} instances each; permutation and relabeling exact, worst affine change {worst_affine:.1e}"))
}

// ------------------------------------------------------------------ 3

fn c3_gdv_null() -> Outcome {
    let mut passed = 0;
    let mut worst = 0.0f64;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(3000 + seed);
        let rows: Vec<Vec<f64>> = (0..1000).map(|_| (0..30).map(|_| gauss(&mut rng)).collect()).collect();
        let labels: Vec<usize> = (0..1000).map(|i| i / 500).collect();
        let g = lib_gdv(&rows, &labels, 2);
        worst = worst.max(g.abs());
        if g.abs() < 0.05 {
            passed += 1;
        }
    }
    check(
        passed >= 18,
        format!("{passed}/20 seeds with |GDV| < 0.05 (largest {worst:.4})"),
        format!("only {passed}/20 seeds with |GDV| < 0.05 (largest {worst:.4})"),
    )
}

// ------------------------------------------------------------------ 4

type Batch = Vec<(Vec<u32>, Vec<u8>)>;

fn batch_loss(params: &ModelParams, batch: &Batch) -> f64 {
    let acts: Vec<_> = batch.iter().map(|(t, m)| forward(params, t, m).unwrap()).collect();
    let tokens: Vec<&[u32]> = batch.iter().map(|(t, _)| t.as_slice()).collect();
    let masks: Vec<&[u8]> = batch.iter().map(|(_, m)| m.as_slice()).collect();
    loss(&acts, &tokens, &masks)
}

fn batch_grad(params: &ModelParams, batch: &Batch) -> Gradients {
    let acts: Vec<_> = batch.iter().map(|(t, m)| forward(params, t, m).unwrap()).collect();
    let tokens: Vec<&[u32]> = batch.iter().map(|(t, _)| t.as_slice()).collect();
    let masks: Vec<&[u8]> = batch.iter().map(|(_, m)| m.as_slice()).collect();
    backward(params, &tokens, &masks, &acts)
}

fn c4_gradient_check() -> Outcome {
    let eps = 1e-5;
    let mut worst = 0.0f64;
    for seed in 0..5u64 {
        let cfg = ModelConfig {
            vocab_size: 8,
            embedding_dim: 3,
            hidden_dim_1: 4,
            hidden_dim_2: 4,
            max_seq_len: 5,
            init_scale: 0.5,
            rng_seed: seed,
        };
        let params = init_params(&cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(400 + seed);
        let batch: Batch = (0..3)
            .map(|_| {
                let len = rng.random_range(2..=5);
                let tokens: Vec<u32> = (0..5).map(|k| if k < len { rng.random_range(1..8) } else { PAD_ID }).collect();
                let mask: Vec<u8> = (0..5).map(|k| u8::from(k < len)).collect();
                (tokens, mask)
            })
            .collect();
        let analytic = batch_grad(&params, &batch);
        let mut probe = params.clone();
        for (ti, (name, values)) in analytic.tensors().iter().enumerate() {
            for k in 0..values.len() {
                let orig = probe.tensors_mut()[ti][k];
                probe.tensors_mut()[ti][k] = orig + eps;
                let up = batch_loss(&probe, &batch);
                probe.tensors_mut()[ti][k] = orig - eps;
                let down = batch_loss(&probe, &batch);
                probe.tensors_mut()[ti][k] = orig;
                let numeric = (up - down) / (2.0 * eps);
                let a = values[k];
                let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6);
                if rel >= 1e-4 {
                    return Err(format!("seed {seed} {name}[{k}]: analytic {a:.3e} numeric {numeric:.3e} rel {rel:.2e}"));
                }
                worst = worst.max(rel);
            }
        }
    }
    Ok(format!("5 seeds, every parameter, max relative error {worst:.2e}"))
}

// ------------------------------------------------------------------ 5

fn single_row(tokens: Vec<u32>, mask: Vec<u8>, vocab: &Vocabulary) -> EncodedCorpus {
    EncodedCorpus {
        t_max: tokens.len(),
        tokens,
        mask,
        labels: vec![0],
        padding: PaddingSide::Post,
        vocab: vocab.clone(),
        unk_count: 0,
    }
}

fn c5_padding_inertness() -> Outcome {
    let corpus = generate_corpus(&GrammarSpec::default(), 5, 25).unwrap();
    let vocab = build_vocab(&corpus).unwrap();
    let enc = encode(&corpus, &vocab);
    let mut cfg = ModelConfig::new(vocab.len(), enc.t_max);
    cfg.rng_seed = 5;
    let params = init_params(&cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    for row in 0..100 {
        let len = enc.sentence_len(row);
        let tokens = enc.tokens_row(row)[..len].to_vec();
        let extra = rng.random_range(1..=10);
        let mut padded = tokens.clone();
        padded.extend(std::iter::repeat_n(PAD_ID, extra));
        let mask = vec![1u8; len];
        let mut padded_mask = mask.clone();
        padded_mask.extend(std::iter::repeat_n(0u8, extra));

        let a = forward(&params, &tokens, &mask).unwrap();
        let b = forward(&params, &padded, &padded_mask).unwrap();
        for t in 0..len {
            let same = a.embedded.row(t) == b.embedded.row(t)
                && a.h1.row(t) == b.h1.row(t)
                && a.c1.row(t) == b.c1.row(t)
                && a.h2.row(t) == b.h2.row(t)
                && a.c2.row(t) == b.c2.row(t)
                && a.probs.row(t) == b.probs.row(t);
            if !same {
                return Err(format!("sentence {row}: activation differs at step {t} after {extra} pads"));
            }
        }
        let (la, ga, _) = loss_and_gradients(&params, &single_row(tokens, mask, &vocab), &[0]).unwrap();
        let (lb, gb, _) = loss_and_gradients(&params, &single_row(padded, padded_mask, &vocab), &[0]).unwrap();
        if la != lb {
            return Err(format!("sentence {row}: loss {la} vs {lb}"));
        }
        if ga.tensors() != gb.tensors() {
            return Err(format!("sentence {row}: gradients differ after {extra} pads"));
        }
    }
    Ok("100 sentences, 1-10 pads each: activations, loss and gradients bitwise equal".into())
}

// ------------------------------------------------------------------ 6

fn procrustes_rms(truth: &[[f64; 2]], got: &Matrix) -> f64 {
    let n = truth.len();
    let center = |pts: Vec<[f64; 2]>| -> Vec<[f64; 2]> {
        let mx = pts.iter().map(|p| p[0]).sum::<f64>() / n as f64;
        let my = pts.iter().map(|p| p[1]).sum::<f64>() / n as f64;
        pts.iter().map(|p| [p[0] - mx, p[1] - my]).collect()
    };
    let a = center(truth.to_vec());
    let b = center((0..n).map(|i| [got[(i, 0)], got[(i, 1)]]).collect());
    let mut best = f64::INFINITY;
    for flip in [1.0, -1.0] {
        let bf: Vec<[f64; 2]> = b.iter().map(|p| [p[0], flip * p[1]]).collect();
        // Optimal rotation of bf onto a.
        let (mut sxx, mut sxy) = (0.0, 0.0);
        for (p, q) in a.iter().zip(&bf) {
            sxx += p[0] * q[0] + p[1] * q[1];
            sxy += p[1] * q[0] - p[0] * q[1];
        }
        let th = sxy.atan2(sxx);
        let (c, s) = (th.cos(), th.sin());
        let ss: f64 = a
            .iter()
            .zip(&bf)
            .map(|(p, q)| {
                let r = [c * q[0] - s * q[1], s * q[0] + c * q[1]];
                (p[0] - r[0]).powi(2) + (p[1] - r[1]).powi(2)
            })
            .sum();
        best = best.min((ss / n as f64).sqrt());
    }
    best
}

fn c6_mds_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    let mut worst = 0.0f64;
    for trial in 0..50 {
        let n = if trial == 0 { 200 } else { rng.random_range(3..=200) };
        let truth: Vec<[f64; 2]> = (0..n).map(|_| [rng.random_range(-10.0..10.0), rng.random_range(-5.0..5.0)]).collect();
        let mut dist = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                dist[(i, j)] = ((truth[i][0] - truth[j][0]).powi(2) + (truth[i][1] - truth[j][1]).powi(2)).sqrt();
            }
        }
        let r = classical_mds(&dist, 2).map_err(|e| format!("trial {trial}: {e}"))?;
        let rms = procrustes_rms(&truth, &r.coords);
        worst = worst.max(rms);
        if rms >= 1e-8 {
            return Err(format!("trial {trial} (N={n}): Procrustes RMS {rms:.2e}"));
        }
    }
    Ok(format!("50 configurations, N up to 200, worst Procrustes RMS {worst:.1e}"))
}

// ------------------------------------------------------------------ 7

fn c7_tsne() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for class in 0..3 {
        let center: Vec<f64> = (0..10).map(|k| if k == class { 25.0 } else { 0.0 }).collect();
        for _ in 0..100 {
            rows.push(center.iter().map(|c| c + gauss(&mut rng)).collect::<Vec<f64>>());
            labels.push(class);
        }
    }
    let n = rows.len();
    let cfg = TsneConfig { perplexity: 30.0, seed: 7, ..TsneConfig::default() };

    let target = cfg.perplexity.ln();
    let mut worst_h = 0.0f64;
    for i in 0..n {
        let sq: Vec<f64> = (0..n)
            .filter(|&j| j != i)
            .map(|j| rows[i].iter().zip(&rows[j]).map(|(a, b)| (a - b).powi(2)).sum())
            .collect();
        let c = perplexity_calibration(&sq, cfg.perplexity).map_err(|e| e.to_string())?;
        // Rebuild the conditional distribution from sigma alone.
        let w: Vec<f64> = sq.iter().map(|d| (-(d - sq.iter().cloned().fold(f64::INFINITY, f64::min)) / (2.0 * c.sigma * c.sigma)).exp()).collect();
        let total: f64 = w.iter().sum();
        let h: f64 = -w.iter().map(|x| x / total).filter(|&p| p > 0.0).map(|p| p * p.ln()).sum::<f64>();
        worst_h = worst_h.max((h - target).abs());
    }
    if worst_h >= 1e-5 {
        return Err(format!("entropy off by {worst_h:.2e}"));
    }

    let r = tsne(&to_matrix(&rows), &cfg).map_err(|e| e.to_string())?;
    let ProjectionDiagnostics::Tsne(diag) = &r.diagnostics else { return Err("wrong diagnostics".into()) };
    if diag.max_entropy_error >= 1e-5 {
        return Err(format!("embedding run reports entropy error {:.2e}", diag.max_entropy_error));
    }
    let y = &r.coords;
    let mut pure = 0usize;
    for i in 0..n {
        let mut d: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| ((y[(i, 0)] - y[(j, 0)]).powi(2) + (y[(i, 1)] - y[(j, 1)]).powi(2), j))
            .collect();
        d.sort_by(|a, b| a.0.total_cmp(&b.0));
        pure += d[..10].iter().filter(|(_, j)| labels[*j] == labels[i]).count();
    }
    let purity = pure as f64 / (10 * n) as f64;
    if purity <= 0.95 {
        return Err(format!("10-NN purity {purity:.3}"));
    }
    let after: Vec<(usize, f64)> =
        diag.kl_history.iter().copied().filter(|&(it, _)| it >= cfg.exaggeration_iters).collect();
    for w in after.windows(2) {
        if w[1].1 > w[0].1 + 1e-9 {
            return Err(format!("KL rose from {:.6} at {} to {:.6} at {}", w[0].1, w[0].0, w[1].1, w[1].0));
        }
    }
    Ok(format!(
        "entropy error {worst_h:.1e}, 10-NN purity {purity:.3}, KL non-increasing over {} checkpoints (final {:.4})",
        after.len(),
        diag.final_kl
    ))
}

// ------------------------------------------------------------------ 8 & 9

struct SeedRun {
    seed: u64,
    trained: Vec<(LayerId, f64)>,
    untrained_lstm2: f64,
}

fn layer_gdvs(params: &ModelParams, enc: &EncodedCorpus, cfg: &RunConfig) -> Vec<(LayerId, f64)> {
    let tables = extract_all(params, enc, &cfg.pooling_plan(), "").unwrap();
    LayerId::ALL.iter().map(|l| (*l, gdv(&tables[l].point_set().unwrap()).unwrap().gdv)).collect()
}

/// Seeds here are disjoint from the pilot seeds used to pick defaults.
fn training_runs() -> Vec<SeedRun> {
    let cfg = RunConfig::default();
    let corpus = generate_corpus(&GrammarSpec::default(), cfg.seed, cfg.corpus.n_per_class).unwrap();
    let vocab = build_vocab(&corpus).unwrap();
    let enc = encode(&corpus, &vocab);
    let (train_set, _) = split(&enc, cfg.corpus.train_fraction, cfg.seed).unwrap();
    (101..=105u64)
        .map(|seed| {
            let mut model = ModelConfig::new(vocab.len(), enc.t_max);
            model.init_scale = cfg.model.init_scale;
            model.rng_seed = seed;
            let init = init_params(&model).unwrap();
            let untrained = layer_gdvs(&init, &enc, &cfg);
            let mut tc = cfg.train_config();
            tc.shuffle_seed = seed;
            let (trained_params, _) = train(init, &train_set, &tc).unwrap();
            let trained = layer_gdvs(&trained_params, &enc, &cfg);
            let fmt: Vec<String> = trained.iter().map(|(l, g)| format!("{l}={g:.4}")).collect();
            println!("    seed {seed}: {}  (untrained lstm2={:.4})", fmt.join(" "), untrained[2].1);
            SeedRun { seed, trained, untrained_lstm2: untrained[2].1 }
        })
        .collect()
}

fn c8_ordinal_pattern(runs: &[SeedRun]) -> Outcome {
    let ok: Vec<u64> = runs
        .iter()
        .filter(|r| {
            let get = |l: LayerId| r.trained.iter().find(|(k, _)| *k == l).unwrap().1;
            let all_negative = r.trained.iter().all(|(_, g)| *g < 0.0);
            let min = r.trained.iter().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap().0;
            all_negative && min == LayerId::Lstm2 && get(LayerId::Output) > get(LayerId::Lstm2)
        })
        .map(|r| r.seed)
        .collect();
    check(
        ok.len() >= 4,
        format!("pattern holds in {}/5 training seeds {:?}", ok.len(), ok),
        format!("pattern holds in only {}/5 training seeds {:?}", ok.len(), ok),
    )
}

fn c9_trained_vs_untrained(runs: &[SeedRun]) -> Outcome {
    let gaps: Vec<f64> = runs.iter().map(|r| r.untrained_lstm2 - r.trained[2].1).collect();
    let ok = gaps.iter().filter(|&&g| g >= 0.1).count();
    let shown: Vec<String> = gaps.iter().map(|g| format!("{g:.3}")).collect();
    check(
        ok >= 4,
        format!("lstm2 gap >= 0.1 in {ok}/5 seeds (gaps {})", shown.join(", ")),
        format!("lstm2 gap >= 0.1 in only {ok}/5 seeds (gaps {})", shown.join(", ")),
    )
}

// ------------------------------------------------------------------ 10

fn c10_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let mut cfg = RunConfig::default();
    cfg.seed = 10;
    cfg.corpus.n_per_class = 60;
    cfg.train.epochs = 3;
    cfg.analysis.perplexity = 30.0;
    cfg.analysis.tsne_iterations = 400;
    commands::run_pipeline(&cfg, &a).map_err(|e| e.to_string())?;
    let outcome = commands::replay(&a.join("manifest.json"), &b).map_err(|e| e.to_string())?;
    if !outcome.mismatched.is_empty() || !outcome.missing.is_empty() {
        return Err(format!("replay differs: {:?} {:?}", outcome.mismatched, outcome.missing));
    }
    let mut files = vec!["corpus.jsonl".to_string(), "model.ckpt".into(), GDV_FILE.into()];
    for layer in LayerId::ALL {
        for m in ["mds", "tsne"] {
            files.push(format!("projections/{}_{m}.csv", layer.as_str()));
        }
    }
    let same = |rel: &str, x: &Path, y: &Path| std::fs::read(x.join(rel)).ok().zip(std::fs::read(y.join(rel)).ok()).is_some_and(|(p, q)| p == q);
    if let Some(bad) = files.iter().find(|f| !same(f, &a, &b)) {
        return Err(format!("{bad} not byte-identical"));
    }
    Ok(format!("replayed manifest: {} artifacts identical, incl. {} required files", outcome.compared, files.len()))
}

// ------------------------------------------------------------------ main

fn main() {
    // Under `cargo test -- --list` or filtering, stay quiet.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let mut failed = 0;
    let mut report = |id: u32, name: &str, f: &dyn Fn() -> Outcome| {
        let start = Instant::now();
        let r = f();
        let secs = start.elapsed().as_secs_f64();
        match r {
            Ok(detail) => println!("PASS criterion {id:>2} {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {id:>2} {name}: {detail} [{secs:.1}s]");
            }
        }
    };
    report(1, "GDV analytic case", &c1_gdv_analytic);
    report(2, "GDV invariances", &c2_gdv_invariances);
    report(3, "GDV null behavior", &c3_gdv_null);
    report(4, "LSTM gradient check", &c4_gradient_check);
    report(5, "padding inertness", &c5_padding_inertness);
    report(6, "classical MDS exactness", &c6_mds_exactness);
    report(7, "t-SNE calibration and separation", &c7_tsne);
    println!("    training 5 seeds on the default corpus...");
    let runs = training_runs();
    report(8, "layer ordering of GDV", &|| c8_ordinal_pattern(&runs));
    report(9, "trained vs untrained contrast", &|| c9_trained_vs_untrained(&runs));
    report(10, "end-to-end determinism", &c10_determinism);
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
