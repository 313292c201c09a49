import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'Nnorm.settings')
django.setup()
