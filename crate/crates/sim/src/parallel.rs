use rayon::{ThreadPool, ThreadPoolBuilder};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "FDENV_THREADS";

/// Worker count from [`THREADS_ENV`], or rayon's default when unset or invalid.
pub fn thread_count() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

pub fn thread_pool() -> ThreadPool {
    let mut builder = ThreadPoolBuilder::new();
    if let Some(n) = thread_count() {
        builder = builder.num_threads(n);
    }
    builder.build().expect("thread pool starts")
}
