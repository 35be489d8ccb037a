use criterion::{black_box, criterion_group, criterion_main, Criterion};
use moql_core::envs::{space_traders_original, EnvId};
use moql_core::oracle::oracle_table;
use moql_core::{Decimal, RewardVector, TloUtility};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn oracle(c: &mut Criterion) {
    for env in [EnvId::Original, EnvId::ExtraState] {
        let model = env.build(None).unwrap();
        c.bench_function(&format!("oracle_table/{env}"), |b| {
            b.iter(|| oracle_table(black_box(&model), model.utility()).unwrap())
        });
    }
}

fn primitives(c: &mut Criterion) {
    let u = TloUtility::single(Decimal::new(88, 2));
    let values: Vec<RewardVector> = (0..3)
        .map(|i| RewardVector::new(vec![0.8 + 0.05 * i as f64, -10.0 - i as f64]))
        .collect();
    c.bench_function("tlo_greedy/3_actions", |b| {
        b.iter(|| u.greedy(black_box(&values)).unwrap())
    });
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    c.bench_function("tlo_softmax_select/3_actions", |b| {
        b.iter(|| u.softmax_select(black_box(&values), 5.0, &mut rng).unwrap())
    });

    let model = space_traders_original();
    let a = model.initial();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    c.bench_function("model_step", |b| {
        b.iter(|| model.step(a, black_box(1), &mut rng).unwrap())
    });
}

criterion_group!(benches, oracle, primitives);
criterion_main!(benches);
