package main

func handle(code int) string {
	for i := 0; i < 3; i++ {
		if code == i {
			return "low"
		}
	}
	return "high"
}
