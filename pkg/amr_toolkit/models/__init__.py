# Result and configuration models
