use rayon::prelude::*;

pub type Task<'a, T> = Box<dyn FnOnce() -> T + Send + 'a>;

/// Runs `tasks` on up to `jobs` threads; results come back in task order
/// regardless of scheduling.
pub fn run<'a, T: Send>(tasks: Vec<Task<'a, T>>, jobs: usize) -> Vec<T> {
    if jobs <= 1 || tasks.len() <= 1 {
        return tasks.into_iter().map(|t| t()).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(|| tasks.into_par_iter().map(|t| t()).collect()),
        Err(_) => tasks.into_iter().map(|t| t()).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_stable() {
        let tasks: Vec<Task<usize>> = (0..20usize)
            .map(|i| Box::new(move || i * i) as Task<usize>)
            .collect();
        assert_eq!(run(tasks, 4), (0..20).map(|i| i * i).collect::<Vec<_>>());
    }
}
