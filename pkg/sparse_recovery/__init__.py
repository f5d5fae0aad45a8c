# Log-sum sparse recovery toolkit
