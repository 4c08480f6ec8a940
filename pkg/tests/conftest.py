from hypothesis import settings

settings.register_profile("pkg", deadline=None, max_examples=40)
settings.load_profile("pkg")
