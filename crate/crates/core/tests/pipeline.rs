use gbs::clique::{self, NodeSelect};
use gbs::graph::{erdos_renyi, generate_planted};
use gbs::io;
use gbs::linalg::RMat;
use gbs::points;
use gbs::sampler::{self, SamplerConfig};
use gbs::similarity;
use gbs::subgraph;
use gbs::vibronic::{self, VibronicInput};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn planted_graph_through_files_to_dense_subgraphs() {
    let g = generate_planted(4);
    let g = io::graph_from_json(&io::graph_to_json(&g)).unwrap();
    let config = SamplerConfig { max_photons: Some(10), ..SamplerConfig::default() };
    let batch = sampler::sample(g.kernel(), 4.0, 60, false, 0.0, 1, config).unwrap();
    let batch = io::batch_from_jsonl(&io::batch_to_jsonl(&batch)).unwrap();
    assert_eq!(batch.samples.len(), 60);
    assert!(batch.samples.iter().all(|s| s.total() <= 10));

    let kept = sampler::postselect(&batch, 2, 10).unwrap();
    let seeds = sampler::to_subgraphs(&kept, g.node_count()).unwrap();
    let found = subgraph::search(&seeds, &g, 4, 10, 5, 2).unwrap();
    for size in 4..=10 {
        let ranked = &found.by_size[&size];
        assert!(ranked.len() <= 5);
        assert!(ranked.windows(2).all(|w| w[0].density >= w[1].density));
        for r in ranked {
            assert_eq!(r.nodes.len(), size);
            assert!((subgraph::density(&g, &r.nodes).unwrap() - r.density).abs() < 1e-15);
        }
    }
    let json = io::result_to_json("subgraph", &found);
    assert!(json.contains("\"format_version\""));
}

#[test]
fn threshold_samples_seed_clique_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let g = erdos_renyi(16, 0.6, &mut rng);
    let batch = sampler::sample(g.kernel(), 3.0, 40, true, 0.1, 5, SamplerConfig::default()).unwrap();
    assert!(batch.samples.iter().all(|s| s.is_binary()));
    let seeds = sampler::to_subgraphs(&batch, 16).unwrap();
    let cliques = clique::search(&seeds, &g, 10, NodeSelect::Uniform, 6).unwrap();
    assert!(!cliques.is_empty());
    assert!(cliques.iter().all(|c| clique::is_clique(&g, c)));
    assert!(cliques.windows(2).all(|w| w[0].len() >= w[1].len()));
}

#[test]
fn edge_list_and_json_describe_the_same_graph() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let g = erdos_renyi(9, 0.4, &mut rng);
    let from_csv = io::graph_from_edge_csv(&io::graph_to_edge_csv(&g)).unwrap();
    let from_json = io::graph_from_json(&io::graph_to_json(&g)).unwrap();
    assert_eq!(from_csv.adjacency(), g.adjacency());
    assert_eq!(from_json.adjacency(), g.adjacency());
}

#[test]
fn feature_vectors_from_exact_and_sampled_estimates_agree_roughly() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let g = erdos_renyi(6, 0.6, &mut rng);
    let e = similarity::Event::new(2, 2, 6).unwrap();
    let exact = similarity::event_probability_exact(g.kernel(), 1.5, &e).unwrap();
    let batch = sampler::sample(g.kernel(), 1.5, 4000, false, 0.0, 12, SamplerConfig::default()).unwrap();
    let sampled = similarity::feature_vector_sampling(&batch, &[2], 2).unwrap().values[0];
    // binomial standard error at 4000 samples is below 0.008
    assert!((sampled - exact).abs() < 0.03, "{sampled} vs {exact}");
    let csv = io::features_to_csv(&[("g".into(), similarity::FeatureVector {
        ks: vec![2],
        n_max: 2,
        values: vec![exact],
        n_samples: 0,
    })]);
    assert!(csv.lines().any(|l| l.starts_with("g,2,2,")));
}

#[test]
fn point_process_files_round_trip() {
    let space = points::clustered_space(2, 10, 10).unwrap();
    let back = io::points_from_csv(&io::points_to_csv(&space)).unwrap();
    assert_eq!(back.coords(), space.coords());
    let k = points::rbf_kernel(&back, 1.0).unwrap();
    let batch = points::permanental_sample(&k, 3.0, 20, 1).unwrap();
    assert_eq!(batch.meta.modes, 30);
    let again = points::permanental_sample(&k, 3.0, 20, 1).unwrap();
    assert_eq!(batch, again);
}

#[test]
fn molecule_file_to_spectrum() {
    let input = VibronicInput::new(
        vec![900.0, 1300.0],
        vec![1000.0, 1200.0],
        RMat::from_row_slice(2, 2, &[0.8, 0.6, -0.6, 0.8]),
        vec![0.6, -0.4],
        0.0,
    )
    .unwrap();
    let input = io::vibronic_from_json(&io::vibronic_to_json(&input)).unwrap();
    let p = vibronic::gbs_params(&input).unwrap();
    let batch = vibronic::sample_vibronic(&p, 500, 3, SamplerConfig::default()).unwrap();
    let e = vibronic::energies(&batch, &input.w, &input.wp).unwrap();
    let s = vibronic::spectrum(&e, 20.0, 25.0, None).unwrap();
    assert_eq!(s.counts.iter().sum::<usize>() + s.outside, 500);
    let csv = io::spectrum_to_csv(&s);
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), s.counts.len() + 1);
}
