"""Domain models (typed data structures shared across components)."""




