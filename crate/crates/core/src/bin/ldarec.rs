//! Command-line front end. Exit codes: 0 success, 2 bad config or arguments,
//! 3 data/input errors, 4 numerical divergence.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;
use serde::Deserialize;

use ldarec::analysis::{
    generate_tags, load_model, run_experiment, topic_trends, year_span, ExperimentConfig, SavedModel,
};
use ldarec::corpus::{
    build_vocabulary, encode_corpus, read_records, tokenize, Corpus, Document, TokenizerConfig,
    Vocabulary,
};
use ldarec::lda::{exact_posterior, fold_in_batch, top_words, FoldInConfig, LdaConfig, TopicModel};
use ldarec::par::Execution;
use ldarec::recommenders::io::{read_app_followers, read_ratings, read_usage};
use ldarec::recommenders::{
    block_coefficient, coldstart_app_score, fit_preference_transfer, initial_coefficients,
    knn_cosine_laplacian, pearson_block_similarity, predict_preferences, rank_followees,
    region_membership, residual_mean_square, tlpmf_log_likelihood, topic_set_union,
    FolloweeProfile, TlpmfModel, TransferConfig, UserLikes, UserTopicVectors,
};
use ldarec::{Error, Result};

#[derive(Parser)]
#[command(name = "ldarec", version, about = "LDA topic analysis and topic-driven recommenders")]
struct Cli {
    /// Run per-document work on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Filter and encode a JSON-lines record file.
    Ingest {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Encoded corpus (JSON).
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a model and write model, topic table, trends, tags and manifest.
    #[command(alias = "run")]
    Train(TrainArgs),
    /// Topic table of a saved model as TSV.
    Topics {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 20)]
        top_words: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mean yearly topic mass of a saved model as CSV.
    Trends {
        #[arg(long)]
        model: PathBuf,
        /// Inclusive range, e.g. 2013:2017. Defaults to the corpus span.
        #[arg(long, value_parser = parse_years)]
        years: Option<(i32, i32)>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Keyword tags for every training document as JSON lines.
    Tags {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 5)]
        tags_per_doc: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    #[command(subcommand)]
    Recommend(Recommend),
    /// Exact posterior over assignments of a tiny corpus, one config per line.
    Oracle {
        /// Documents as word ids, documents separated by ';', e.g. "0 1;1".
        #[arg(long)]
        docs: String,
        #[arg(long)]
        vocab_size: usize,
        #[arg(long, default_value_t = 2)]
        topics: usize,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = 0.5)]
        beta: f64,
    },
}

#[derive(Subcommand)]
enum Recommend {
    /// Rank followees by topical overlap with a set of paper titles.
    Followees {
        #[arg(long)]
        model: PathBuf,
        /// Records (JSON lines) describing the user's papers.
        #[arg(long)]
        papers: PathBuf,
        /// JSON lines `{"followee_id": .., "text": ..}`, one tweet per line.
        #[arg(long)]
        tweets: PathBuf,
        #[arg(long, default_value_t = 3)]
        topics_per_text: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Fit cross-network preference transfer and print top unrated items.
    Transfer {
        /// CSV `user_id,item_id,rating`.
        #[arg(long)]
        ratings: PathBuf,
        /// JSON lines `{"user_id", "tweet_topics": [..], "social_topics": [..]}`.
        #[arg(long)]
        users: PathBuf,
        /// JSON lines `{"item_id", "topics": [..]}`; builds a kNN item graph.
        #[arg(long)]
        items: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        neighbours: usize,
        #[arg(long, default_value_t = 10)]
        factors: usize,
        #[arg(long, default_value_t = 0.5)]
        eta: f64,
        #[arg(long, default_value_t = 0.01)]
        gamma: f64,
        #[arg(long, default_value_t = 0.01)]
        lambda: f64,
        #[arg(long, default_value_t = 0.01)]
        theta_reg: f64,
        #[arg(long, default_value_t = 500)]
        iters: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
    /// Log-likelihood of ratings under a topic/location-aware PMF model.
    Tlpmf {
        #[arg(long)]
        ratings: PathBuf,
        /// JSON `{"users", "items", "u", "c", "tl", "sigma2"}`.
        #[arg(long)]
        factors: PathBuf,
    },
    /// Score cold-start apps from their followers. Follower ids name topic
    /// slots of the model ("0".."K-1").
    Coldstart {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        liked: PathBuf,
        #[arg(long)]
        disliked: PathBuf,
        /// JSON lines `{"app_id", "followers": {id: prob}}`.
        #[arg(long)]
        apps: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Similarity-weighted coefficient of a candidate block against a region.
    Location {
        /// CSV `user_id,app_id,block_id`.
        #[arg(long)]
        usage: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        region: Vec<String>,
        #[arg(long)]
        candidate: String,
        #[arg(long)]
        threshold: f64,
    },
}

#[derive(Args)]
struct CorpusArgs {
    /// JSON-lines records `{id, title, abstract, year, venue}`.
    #[arg(long)]
    input: PathBuf,
    /// Comma-separated venues to keep.
    #[arg(long, value_delimiter = ',')]
    venues: Option<Vec<String>>,
    /// Inclusive year range, e.g. 2013:2017.
    #[arg(long, value_parser = parse_years)]
    years: Option<(i32, i32)>,
    #[arg(long, default_value_t = 2)]
    min_df: usize,
    #[arg(long, default_value_t = 3)]
    min_token_len: usize,
    /// Stopword file, one word per line.
    #[arg(long, env = "LDAREC_STOPWORDS")]
    stopwords: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long, default_value_t = 100)]
    topics: usize,
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    #[arg(long, default_value_t = 0.01)]
    beta: f64,
    #[arg(long, default_value_t = 1000)]
    iters: usize,
    #[arg(long, default_value_t = 200)]
    burn_in: usize,
    #[arg(long, default_value_t = 10)]
    sample_lag: usize,
    /// Average estimates over post-burn-in samples instead of using the last state.
    #[arg(long)]
    average: bool,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    top_words: usize,
    #[arg(long, default_value_t = 5)]
    tags_per_doc: usize,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

fn parse_years(s: &str) -> std::result::Result<(i32, i32), String> {
    let (a, b) = s.split_once(':').ok_or("expected FROM:TO")?;
    let lo = a.trim().parse::<i32>().map_err(|e| e.to_string())?;
    let hi = b.trim().parse::<i32>().map_err(|e| e.to_string())?;
    if lo > hi {
        return Err(format!("empty range {lo}:{hi}"));
    }
    Ok((lo, hi))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    match run(cli.command, exec) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn emit(out: Option<&Path>, body: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, body).map_err(|e| Error::Io { path: path.to_owned(), source: e }),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn run(command: Command, exec: Execution) -> Result<()> {
    match command {
        Command::Ingest { corpus, out } => ingest(&corpus, &out),
        Command::Train(args) => train(args),
        Command::Topics { model, top_words: n, out } => {
            let model = saved_topic_model(&load_model(&model)?);
            let mut tsv = String::from("topic_id\trank\tterm\tprob\n");
            for k in 0..model.num_topics() {
                for (rank, (term, p)) in top_words(&model, k, n)?.into_iter().enumerate() {
                    writeln!(tsv, "{k}\t{}\t{term}\t{p}", rank + 1).unwrap();
                }
            }
            emit(out.as_deref(), &tsv)
        }
        Command::Trends { model, years, out } => {
            let saved = load_model(&model)?;
            let theta = saved.state.estimate_theta();
            let span = years
                .or_else(|| year_span(&saved.corpus.documents))
                .ok_or(Error::NoDocumentsInRange(0, 0))?;
            let trends = topic_trends(&saved.corpus.documents, &theta, span)?;
            let mut csv = String::from("year,topic,mass\n");
            for (year, row) in &trends.by_year {
                for (k, mass) in row.iter().enumerate() {
                    writeln!(csv, "{year},{k},{mass}").unwrap();
                }
            }
            if !trends.undated.is_empty() {
                eprintln!("{} documents without a year left out", trends.undated.len());
            }
            emit(out.as_deref(), &csv)
        }
        Command::Tags { model, tags_per_doc, out } => {
            let saved = load_model(&model)?;
            let model = saved_topic_model(&saved);
            let mut lines = String::new();
            for (doc, theta) in saved.corpus.documents.iter().zip(&model.theta) {
                let tags = generate_tags(&model, theta, tags_per_doc)?;
                lines.push_str(&serde_json::json!({ "doc_id": doc.id, "tags": tags }).to_string());
                lines.push('\n');
            }
            emit(out.as_deref(), &lines)
        }
        Command::Recommend(r) => recommend(r, exec),
        Command::Oracle { docs, vocab_size, topics, alpha, beta } => {
            let docs = docs
                .split(';')
                .map(|d| {
                    d.split_whitespace()
                        .map(|w| w.parse::<u32>().map_err(|e| Error::InvalidConfig(format!("word id {w:?}: {e}"))))
                        .collect::<Result<Vec<u32>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            let corpus = Corpus::from_token_ids(&docs, vocab_size)?;
            let config = LdaConfig { topics, alpha, beta, ..LdaConfig::default() };
            let post = exact_posterior(&corpus, &config)?;
            let mut out = String::from("assignment\tprobability\n");
            for (z, p) in &post.probabilities {
                let z: Vec<String> = z.iter().map(u32::to_string).collect();
                writeln!(out, "{}\t{p}", z.join(" ")).unwrap();
            }
            emit(None, &out)
        }
    }
}

fn tokenizer(args: &CorpusArgs) -> Result<TokenizerConfig> {
    let mut cfg = match &args.stopwords {
        Some(p) => TokenizerConfig::with_stopword_file(p)?,
        None => TokenizerConfig::default(),
    };
    cfg.min_len = args.min_token_len;
    Ok(cfg)
}

fn ingest(args: &CorpusArgs, out: &Path) -> Result<()> {
    let records = read_records(&args.input)?;
    let (records, mut excluded) =
        ldarec::analysis::filter_records(records, args.venues.as_deref(), args.years);
    if records.is_empty() {
        return Err(Error::NoDocuments);
    }
    let tok = tokenizer(args)?;
    let vocabulary = build_vocabulary(&records, &tok, args.min_df)?;
    let encoded = encode_corpus(&records, &vocabulary, &tok);
    excluded.no_tokens = encoded.excluded;
    let body = serde_json::json!({
        "vocabulary": encoded.corpus.vocabulary,
        "documents": encoded.corpus.documents,
        "excluded": excluded,
    });
    eprintln!(
        "{} documents, {} terms, {} tokens",
        encoded.corpus.num_docs(),
        encoded.corpus.vocab_size(),
        encoded.corpus.total_tokens()
    );
    emit(Some(out), &(serde_json::to_string(&body)? + "\n"))
}

fn train(a: TrainArgs) -> Result<()> {
    let mut config = ExperimentConfig::new(a.corpus.input, a.out);
    config.venues = a.corpus.venues;
    config.years = a.corpus.years;
    config.min_df = a.corpus.min_df;
    config.min_token_len = a.corpus.min_token_len;
    config.stopwords = a.corpus.stopwords;
    config.top_words = a.top_words;
    config.tags_per_doc = a.tags_per_doc;
    config.lda = LdaConfig {
        topics: a.topics,
        alpha: a.alpha,
        beta: a.beta,
        iterations: a.iters,
        burn_in: a.burn_in,
        sample_lag: a.sample_lag,
        seed: a.seed,
        average_samples: a.average,
    };
    let out = run_experiment(&config)?;
    let m = &out.manifest;
    eprintln!(
        "{} documents, {} terms, {} tokens; log-likelihood {:.3} after {} sweeps; wrote {}",
        m.corpus.documents,
        m.corpus.vocabulary_size,
        m.corpus.tokens,
        m.final_log_likelihood,
        m.sweeps,
        config.output_dir.display()
    );
    Ok(())
}

fn saved_topic_model(saved: &SavedModel) -> TopicModel {
    saved.state.to_model(&saved.corpus.vocabulary)
}

/// Encode free text against a fixed vocabulary; unknown words are dropped.
fn encode_text(id: &str, text: &str, vocabulary: &Vocabulary) -> Document {
    let tokens = tokenize(text, &TokenizerConfig::without_stopwords(1))
        .iter()
        .filter_map(|t| vocabulary.id(t))
        .collect();
    Document { id: id.to_owned(), tokens, year: 0 }
}

fn encode_records(path: &Path, vocabulary: &Vocabulary) -> Result<Vec<Document>> {
    Ok(read_records(path)?
        .iter()
        .map(|r| encode_text(&r.id, &r.text(), vocabulary))
        .filter(|d| !d.tokens.is_empty())
        .collect())
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| Error::Io { path: path.to_owned(), source: e })?;
    let mut rows = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::Io { path: path.to_owned(), source: e })?;
        if line.trim().is_empty() {
            continue;
        }
        rows.push(serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_owned(),
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(rows)
}

#[derive(Deserialize)]
struct Tweet {
    followee_id: String,
    text: String,
}

#[derive(Deserialize)]
struct UserRow {
    user_id: String,
    tweet_topics: Vec<f64>,
    social_topics: Vec<f64>,
}

#[derive(Deserialize)]
struct ItemRow {
    item_id: String,
    topics: Vec<f64>,
}

#[derive(Deserialize)]
struct TlpmfFile {
    users: Vec<String>,
    items: Vec<String>,
    u: Vec<Vec<f64>>,
    c: Vec<Vec<f64>>,
    tl: Vec<Vec<f64>>,
    sigma2: f64,
}

fn matrix(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::DimensionMismatch(format!("ragged rows in {what}")));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

fn recommend(r: Recommend, exec: Execution) -> Result<()> {
    match r {
        Recommend::Followees { model, papers, tweets, topics_per_text, seed } => {
            let model = saved_topic_model(&load_model(&model)?);
            let fold = FoldInConfig { seed, ..FoldInConfig::default() };
            let paper_docs = encode_records(&papers, &model.vocabulary)?;
            let paper_thetas = fold_in_batch(&model, &paper_docs, &fold, exec)?;
            let topics_p: BTreeSet<usize> = topic_set_union(&paper_thetas, topics_per_text);

            let mut by_followee: BTreeMap<String, Vec<Document>> = BTreeMap::new();
            for t in read_jsonl::<Tweet>(&tweets)? {
                let doc = encode_text(&t.followee_id, &t.text, &model.vocabulary);
                let entry = by_followee.entry(t.followee_id).or_default();
                if !doc.tokens.is_empty() {
                    entry.push(doc);
                }
            }
            let mut profiles = Vec::new();
            for (id, docs) in by_followee {
                if docs.is_empty() {
                    eprintln!("followee {id}: no tweet shares the model vocabulary; skipped");
                    continue;
                }
                let thetas = fold_in_batch(&model, &docs, &fold, exec)?;
                profiles.push(FolloweeProfile::from_tweet_topics(&id, &thetas, topics_per_text));
            }
            let mut out = String::from("followee_id\tscore\n");
            for (id, score) in rank_followees(&topics_p, &profiles, exec)? {
                writeln!(out, "{id}\t{score}").unwrap();
            }
            emit(None, &out)
        }
        Recommend::Transfer {
            ratings, users, items, neighbours, factors, eta, gamma, lambda, theta_reg, iters, seed, top,
        } => {
            let ratings = read_ratings(&ratings)?;
            let rows: BTreeMap<String, UserRow> =
                read_jsonl::<UserRow>(&users)?.into_iter().map(|u| (u.user_id.clone(), u)).collect();
            let mut tweet = Vec::new();
            let mut social = Vec::new();
            for id in &ratings.users {
                let row = rows
                    .get(id)
                    .ok_or_else(|| Error::InvalidProfile(format!("no topic vectors for user {id}")))?;
                tweet.push(row.tweet_topics.clone());
                social.push(row.social_topics.clone());
            }
            let user_vectors =
                UserTopicVectors::new(matrix(&tweet, "tweet topics")?, matrix(&social, "social topics")?)?;
            let j = ratings.items.len();
            let graph = match items {
                Some(path) => {
                    let rows: BTreeMap<String, Vec<f64>> =
                        read_jsonl::<ItemRow>(&path)?.into_iter().map(|r| (r.item_id, r.topics)).collect();
                    let item_rows = ratings
                        .items
                        .iter()
                        .map(|id| {
                            rows.get(id)
                                .cloned()
                                .ok_or_else(|| Error::InvalidProfile(format!("no topics for item {id}")))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    knn_cosine_laplacian(&matrix(&item_rows, "item topics")?, neighbours)
                }
                None => DMatrix::zeros(j, j),
            };
            let config = TransferConfig {
                factors,
                eta,
                gamma,
                lambda,
                theta_reg,
                max_iterations: iters,
                seed,
                ..TransferConfig::default()
            };
            let fit = fit_preference_transfer(&user_vectors, &ratings.observations, graph, &config)?;
            eprintln!(
                "objective {:.6} after {} steps",
                fit.objective_trace.last().copied().unwrap_or(f64::NAN),
                fit.steps
            );
            let rated: BTreeSet<(usize, usize)> =
                ratings.observations.entries().iter().map(|r| (r.user, r.item)).collect();
            let mut out = String::from("user_id,item_id,score\n");
            for (u, uid) in ratings.users.iter().enumerate() {
                let scores = predict_preferences(&fit.params, &user_vectors, u)?;
                let mut cand: Vec<(usize, f64)> =
                    (0..j).filter(|&i| !rated.contains(&(u, i))).map(|i| (i, scores[i])).collect();
                cand.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
                for (i, s) in cand.into_iter().take(top) {
                    writeln!(out, "{uid},{},{s}", ratings.items[i]).unwrap();
                }
            }
            emit(None, &out)
        }
        Recommend::Tlpmf { ratings, factors } => {
            let ratings = read_ratings(&ratings)?;
            let text = fs::read_to_string(&factors).map_err(|e| Error::Io { path: factors.clone(), source: e })?;
            let f: TlpmfFile = serde_json::from_str(&text)?;
            let model = TlpmfModel::new(matrix(&f.u, "u")?, matrix(&f.c, "c")?, matrix(&f.tl, "tl")?, f.sigma2)?;
            let user_ix: BTreeMap<&str, usize> = f.users.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
            let item_ix: BTreeMap<&str, usize> = f.items.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
            let remapped = ratings
                .observations
                .entries()
                .iter()
                .map(|r| {
                    let (uid, iid) = (&ratings.users[r.user], &ratings.items[r.item]);
                    Ok(ldarec::recommenders::Rating {
                        user: *user_ix
                            .get(uid.as_str())
                            .ok_or_else(|| Error::InvalidProfile(format!("unknown user {uid}")))?,
                        item: *item_ix
                            .get(iid.as_str())
                            .ok_or_else(|| Error::InvalidProfile(format!("unknown item {iid}")))?,
                        value: r.value,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let obs = ldarec::recommenders::RatingObservations::new(remapped)?;
            let body = serde_json::json!({
                "ratings": obs.len(),
                "log_likelihood": tlpmf_log_likelihood(&model, &obs)?,
                "residual_mean_square": residual_mean_square(&model, &obs),
            });
            emit(None, &(serde_json::to_string_pretty(&body)? + "\n"))
        }
        Recommend::Coldstart { model, liked, disliked, apps, seed } => {
            let model = saved_topic_model(&load_model(&model)?);
            let fold = FoldInConfig { seed, ..FoldInConfig::default() };
            let liked = encode_records(&liked, &model.vocabulary)?;
            let disliked = encode_records(&disliked, &model.vocabulary)?;
            let labels: Vec<String> = (0..model.num_topics()).map(|k| k.to_string()).collect();
            let likes = UserLikes::from_documents(&model, &liked, &disliked, &labels, &fold, exec)?;
            let mut out = String::from("app_id\tscore\tskipped\n");
            for app in read_app_followers(&apps)? {
                let s = coldstart_app_score(&likes, &app)?;
                writeln!(out, "{}\t{}\t{}", s.app_id, s.score, s.skipped.join(",")).unwrap();
            }
            emit(None, &out)
        }
        Recommend::Location { usage, region, candidate, threshold } => {
            let usage = read_usage(&usage)?;
            let coefficients = initial_coefficients(&usage);
            let similarities = region
                .iter()
                .map(|b| Ok((b.clone(), pearson_block_similarity(&usage, b, &candidate)?)))
                .collect::<Result<BTreeMap<_, _>>>()?;
            let r_lz = block_coefficient(&usage, &region, &candidate, &coefficients)?;
            let body = serde_json::json!({
                "candidate": candidate,
                "similarities": similarities,
                "coefficient": r_lz,
                "threshold": threshold,
                "joins_region": region_membership(r_lz, threshold),
            });
            emit(None, &(serde_json::to_string_pretty(&body)? + "\n"))
        }
    }
}
